"""Sheaf-semantics evaluator for formulas over section/lottery atoms.

Formulas are trees of atoms (``<``, ``=`` between sections; ``prec``,
``sim``, ``preceq`` between lotteries), connectives, and quantifiers over
declared finite witness families.  Evaluation returns the truth value within
an explicit domain of discourse: conjunction is meet, disjunction join,
negation and implication go through the interior operator, and quantifiers
fold over the declared witnesses.

Quantifier witnesses range over declared families and their restrictions
only; the underlying semantics ranges over all local sections, so an
existential may evaluate smaller than its ideal value.  Reports carry this
caveat.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence, Union

from . import sections as sec
from .lotteries import Lottery, mix, restrict_lottery
from .preference import Family, Preference, truth_value
from .topology import (
    OpenSet,
    complement_interior,
    implies as heyting_implies,
    is_subset,
    join,
    meet,
    not_within,
)

__all__ = [
    "ForcingError",
    "Name",
    "Var",
    "MixTerm",
    "Atom",
    "And",
    "Or",
    "Implies",
    "Not",
    "Exists",
    "ForAll",
    "Formula",
    "parse_formula",
    "eval_formula",
    "forces_formula",
    "check_forcing_laws",
    "EvalContext",
    "WITNESS_CAVEAT",
]

WITNESS_CAVEAT = (
    "quantifier witnesses restricted to declared families and their restrictions"
)


class ForcingError(ValueError):
    pass


@dataclass(frozen=True)
class Name:
    value: str


@dataclass(frozen=True)
class Var:
    value: str


@dataclass(frozen=True)
class MixTerm:
    weight: "Term"
    first: "Term"
    second: "Term"


Term = Union[Name, Var, MixTerm]


@dataclass(frozen=True)
class Atom:
    rel: str  # lt | eq | prec | sim | preceq
    left: Term
    right: Term


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Not:
    body: "Formula"


@dataclass(frozen=True)
class Exists:
    var: str
    family: str
    body: "Formula"


@dataclass(frozen=True)
class ForAll:
    var: str
    family: str
    body: "Formula"


Formula = Union[Atom, And, Or, Implies, Not, Exists, ForAll]

_RELS = {"lt", "eq", "prec", "sim", "preceq"}


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _parse(tokens: list[str], pos: int):
    if pos >= len(tokens):
        raise ForcingError("unexpected end of formula")
    tok = tokens[pos]
    if tok != "(":
        raise ForcingError(f"expected '(' at token {pos}, got {tok!r}")
    head = tokens[pos + 1]
    pos += 2
    if head in _RELS:
        left, pos = _parse_term(tokens, pos)
        right, pos = _parse_term(tokens, pos)
        node: Formula = Atom(head, left, right)
    elif head in ("and", "or", "implies"):
        a, pos = _parse(tokens, pos)
        b, pos = _parse(tokens, pos)
        node = {"and": And, "or": Or, "implies": Implies}[head](a, b)
    elif head == "not":
        a, pos = _parse(tokens, pos)
        node = Not(a)
    elif head in ("exists", "forall"):
        var = tokens[pos]
        fam = tokens[pos + 1]
        pos += 2
        body, pos = _parse(tokens, pos)
        node = (Exists if head == "exists" else ForAll)(var, fam, body)
    else:
        raise ForcingError(f"unknown formula head {head!r}")
    if pos >= len(tokens) or tokens[pos] != ")":
        raise ForcingError(f"expected ')' to close {head!r}")
    return node, pos + 1


def _parse_term(tokens: list[str], pos: int):
    tok = tokens[pos]
    if tok == "(":
        if tokens[pos + 1] != "mix":
            raise ForcingError(f"unknown term head {tokens[pos + 1]!r}")
        pos += 2
        w, pos = _parse_term(tokens, pos)
        a, pos = _parse_term(tokens, pos)
        b, pos = _parse_term(tokens, pos)
        if tokens[pos] != ")":
            raise ForcingError("expected ')' to close mix")
        return MixTerm(w, a, b), pos + 1
    if tok in (")",):
        raise ForcingError("expected a term")
    if tok.startswith("?"):
        return Var(tok[1:]), pos + 1
    return Name(tok), pos + 1


def parse_formula(text: str) -> Formula:
    tokens = _tokenize(text)
    node, pos = _parse(tokens, 0)
    if pos != len(tokens):
        raise ForcingError(f"trailing tokens after formula: {' '.join(tokens[pos:])}")
    return node


@dataclass(frozen=True)
class EvalContext:
    """Named objects a formula may mention."""

    preference: Preference | None
    sections: Mapping[str, sec.Section]
    lotteries: Mapping[str, Lottery]
    families: Mapping[str, Family]

    def family(self, name: str) -> Family:
        if name not in self.families:
            raise ForcingError(f"unknown witness family {name}")
        return self.families[name]


def _resolve_lottery(term: Term, ctx: EvalContext, env: Mapping[str, Lottery], on: OpenSet) -> Lottery:
    if isinstance(term, Var):
        if term.value not in env:
            raise ForcingError(f"unbound variable ?{term.value}")
        lot = env[term.value]
    elif isinstance(term, Name):
        if term.value in env:
            lot = env[term.value]
        elif term.value in ctx.lotteries:
            lot = ctx.lotteries[term.value]
        else:
            raise ForcingError(f"unknown lottery {term.value}")
    else:
        w = _resolve_section(term.weight, ctx, on)
        a = _resolve_lottery(term.first, ctx, env, on)
        b = _resolve_lottery(term.second, ctx, env, on)
        return mix(sec.restrict(w, on), a, b)
    if not is_subset(on, lot.domain):
        raise ForcingError("lottery not defined on the whole domain of discourse")
    return restrict_lottery(lot, on) if lot.domain != on else lot


def _resolve_section(term: Term, ctx: EvalContext, on: OpenSet) -> sec.Section:
    if not isinstance(term, Name):
        raise ForcingError("section terms must be names")
    if term.value not in ctx.sections:
        raise ForcingError(f"unknown section {term.value}")
    s = ctx.sections[term.value]
    if not is_subset(on, s.domain):
        raise ForcingError("section not defined on the whole domain of discourse")
    return s


def eval_formula(
    formula: Formula,
    on: OpenSet,
    ctx: EvalContext,
    env: Mapping[str, Lottery] | None = None,
) -> OpenSet:
    """The truth value of the formula within ``on``."""
    env = env or {}
    if isinstance(formula, Atom):
        if formula.rel in ("lt", "eq"):
            f = sec.restrict(_resolve_section(formula.left, ctx, on), on)
            g = sec.restrict(_resolve_section(formula.right, ctx, on), on)
            cmpres = sec.compare(f, g, on)
            return cmpres.lt if formula.rel == "lt" else cmpres.eq
        if ctx.preference is None:
            raise ForcingError("preference atoms need a declared preference")
        p = _resolve_lottery(formula.left, ctx, env, on)
        q = _resolve_lottery(formula.right, ctx, env, on)
        return truth_value(ctx.preference, formula.rel, p, q, on)
    if isinstance(formula, And):
        return meet(eval_formula(formula.left, on, ctx, env), eval_formula(formula.right, on, ctx, env))
    if isinstance(formula, Or):
        return join(eval_formula(formula.left, on, ctx, env), eval_formula(formula.right, on, ctx, env))
    if isinstance(formula, Not):
        return not_within(eval_formula(formula.body, on, ctx, env), on)
    if isinstance(formula, Implies):
        a = eval_formula(formula.left, on, ctx, env)
        b = eval_formula(formula.right, on, ctx, env)
        return meet(heyting_implies(a, b), on)
    if isinstance(formula, Exists):
        if formula.var in env:
            raise ForcingError(f"variable ?{formula.var} bound twice")
        acc = None
        for _, witness in ctx.family(formula.family).members:
            dom = meet(witness.domain, on)
            w = restrict_lottery(witness, dom)
            t = eval_formula(formula.body, dom, ctx, {**env, formula.var: w})
            acc = t if acc is None else join(acc, t)
        if acc is None:
            raise ForcingError(f"witness family {formula.family} is empty")
        return acc
    if isinstance(formula, ForAll):
        if formula.var in env:
            raise ForcingError(f"variable ?{formula.var} bound twice")
        acc = on
        for _, witness in ctx.family(formula.family).members:
            dom = meet(witness.domain, on)
            w = restrict_lottery(witness, dom)
            t = eval_formula(formula.body, dom, ctx, {**env, formula.var: w})
            # Defined-implies-holds, then interior (via Heyting implication).
            acc = meet(acc, meet(heyting_implies(dom, t), on))
        return acc
    raise ForcingError(f"unhandled formula node {formula!r}")


def forces_formula(formula: Formula, on: OpenSet, ctx: EvalContext) -> bool:
    return eval_formula(formula, on, ctx) == on


@dataclass(frozen=True)
class ForcingLawReport:
    monotonicity_ok: bool
    local_character_ok: bool
    checked: int
    details: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return self.monotonicity_ok and self.local_character_ok


def check_forcing_laws(
    formula: Formula,
    on: OpenSet,
    cover: Sequence[OpenSet],
    ctx: EvalContext,
    extra_subopens: Sequence[OpenSet] = (),
) -> ForcingLawReport:
    """Verify monotonicity on sub-opens and local character over a cover.

    Monotonicity: the truth value on a sub-open equals the global truth value
    met with it.  Local character: if every cover element forces the formula,
    the union must force it; an unforced cover element leaves nothing to
    conclude.
    """
    if not cover:
        raise ForcingError("empty cover")
    details: list[str] = []
    checked = 0
    whole = eval_formula(formula, on, ctx)
    mono_ok = True
    sub_opens = list(cover) + [meet(a, b) for a in cover for b in cover] + list(extra_subopens)
    for v in sub_opens:
        if not is_subset(v, on):
            continue
        checked += 1
        local = eval_formula(formula, v, ctx)
        expected = meet(whole, v)
        if local != expected:
            mono_ok = False
            details.append(f"monotonicity: value on {v} is {local}, expected {expected}")
    union = cover[0]
    for v in cover[1:]:
        union = join(union, v)
    checked += 1
    local_ok = True
    if all(eval_formula(formula, v, ctx) == v for v in cover):
        if eval_formula(formula, union, ctx) != union:
            local_ok = False
            details.append(
                f"local character: every cover element forces the formula but {union} does not"
            )
        else:
            details.append("local character: cover forces, union forces")
    else:
        details.append("local character: not every cover element forces; nothing to conclude")
    return ForcingLawReport(mono_ok, local_ok, checked, tuple(details))
