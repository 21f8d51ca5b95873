"""Preference structures over variable lotteries and falsifiers for the axioms.

Two preference representations are supported:

* ``UtilityPreference``: strict preference induced by prize-weight sections,
  ``p`` worse than ``q`` exactly where the expected utility of ``p`` is
  pointwise below that of ``q``.  The optional ``proper_opens_only`` flag
  denies strict (and non-reflexive indifference) assertions on the full
  carrier, which is how a local-character violation is constructed.
* ``TabulatedPreference``: a per-minimal-open strict ranking over a declared
  finite lottery family on a finite space, monotone under restriction.

Axiom checkers are falsifiers over declared finite families: the axioms
quantify over all local lotteries, which is not enumerable, so every verdict
is pass-on-tested.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

from . import sections as sec
from .lotteries import Lottery, LotteryError, PrizeSet, is_constant_lottery, lotteries_equal, mix, restrict_lottery
from .topology import (
    Atom,
    IntervalOpen,
    OpenSet,
    PosetOpen,
    PosetSpace,
    Space,
    atoms_complement,
    canonical_cover,
    components,
    is_subset,
    iter_sub_opens,
    join,
    meet,
    minimal_open,
    not_within,
)

__all__ = [
    "PreferenceError",
    "UtilityPreference",
    "TabulatedPreference",
    "Preference",
    "Family",
    "expected_utility",
    "truth_value",
    "forces",
    "indifference_region",
    "AxiomReport",
    "Finding",
    "check_weak_order",
    "check_independence",
    "check_continuity",
    "check_minimal_comparability",
    "check_assumption6",
    "check_assumption7",
]


class PreferenceError(ValueError):
    pass


@dataclass(frozen=True)
class Family:
    """A declared finite family of named lotteries."""

    members: tuple[tuple[str, Lottery], ...]

    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.members)

    def get(self, name: str) -> Lottery:
        for n, lot in self.members:
            if n == name:
                return lot
        raise PreferenceError(f"no lottery named {name} in the family")

    def resolve(self, lot: Lottery) -> str | None:
        """Name of the member pointwise-equal to ``lot`` on its domain, if any."""
        for n, member in self.members:
            cand = member
            if cand.domain != lot.domain:
                if not is_subset(lot.domain, cand.domain):
                    continue
                cand = restrict_lottery(cand, lot.domain)
            if lotteries_equal(cand, lot):
                return n
        return None


@dataclass(frozen=True)
class UtilityPreference:
    prizes: PrizeSet
    weights: tuple[tuple[str, sec.Section], ...]
    proper_opens_only: bool = False

    def __post_init__(self) -> None:
        names = [n for n, _ in self.weights]
        if set(names) != set(self.prizes.names):
            raise PreferenceError("need one weight section per prize")

    def weight(self, name: str) -> sec.Section:
        for n, s in self.weights:
            if n == name:
                return s
        raise PreferenceError(f"no weight for prize {name}")

    @property
    def space(self):
        return self.weights[0][1].space


@dataclass(frozen=True)
class TabulatedPreference:
    space: PosetSpace
    family: Family
    table: tuple[tuple[str, tuple[tuple[str, str], ...]], ...]  # point -> (worse, better) pairs

    def __post_init__(self) -> None:
        closed: list[tuple[str, tuple[tuple[str, str], ...]]] = []
        by_point = {point: set(pairs) for point, pairs in self.table}
        for point in self.space.points:
            pairs = set(by_point.get(point, ()))
            for a, b in sorted(pairs):
                self.family.get(a)
                self.family.get(b)
                if a == b:
                    raise PreferenceError(f"ranking at {point} is not irreflexive: {a}")
                if (b, a) in pairs:
                    raise PreferenceError(f"ranking at {point} is not asymmetric: {a}, {b}")
            # Transitive closure of the declared strict ranking.
            changed = True
            while changed:
                changed = False
                for a, b in list(pairs):
                    for c, d in list(pairs):
                        if b == c and (a, d) not in pairs:
                            pairs.add((a, d))
                            changed = True
            for a, b in sorted(pairs):
                if a == b:
                    raise PreferenceError(f"ranking at {point} has a cycle through {a}")
                if (b, a) in pairs:
                    raise PreferenceError(f"ranking at {point} is not asymmetric: {a}, {b}")
            closed.append((point, tuple(sorted(pairs))))
        table = dict(closed)
        # Monotone under restriction: finer stages keep every recorded pair.
        for x in self.space.points:
            for y in self.space.points:
                if x != y and self.space.leq_holds(x, y):
                    missing = set(table[x]) - set(table[y])
                    if missing:
                        a, b = sorted(missing)[0]
                        raise PreferenceError(
                            f"table not monotone: {a} < {b} at {x} missing at finer {y}"
                        )
        object.__setattr__(self, "table", tuple((p, table[p]) for p in self.space.points))

    def pairs_at(self, point: str) -> tuple[tuple[str, str], ...]:
        for p, pairs in self.table:
            if p == point:
                return pairs
        return ()


Preference = Union[UtilityPreference, TabulatedPreference]


# ---------------------------------------------------------------------------
# Truth values


def expected_utility(pref: UtilityPreference, lot: Lottery, on: OpenSet) -> sec.Section:
    """The section sum of weight * coordinate over the support, on ``on``."""
    total: sec.Section | None = None
    for name, w in pref.weights:
        if name not in lot.support:
            continue
        term = sec.mul(sec.restrict(w, on), sec.restrict(lot.coord(name), on))
        total = term if total is None else sec.add(total, term)
    if total is None:
        raise PreferenceError("lottery has empty support")
    return total


def _strict_tv(pref: Preference, p: Lottery, q: Lottery, on: OpenSet) -> OpenSet:
    if isinstance(pref, UtilityPreference):
        return sec.compare(expected_utility(pref, p, on), expected_utility(pref, q, on), on).lt
    # Resolution against the table's family is per minimal open: a glued
    # lottery may restrict to different members at different stages.
    acc = PosetOpen(pref.space, frozenset())
    for x in pref.space.points:
        up = minimal_open(pref.space, x)
        if not is_subset(up, on):
            continue
        pn = pref.family.resolve(restrict_lottery(p, up))
        qn = pref.family.resolve(restrict_lottery(q, up))
        if pn is None or qn is None:
            raise PreferenceError(f"lottery not in the table's family (at stage {x})")
        if (pn, qn) in pref.pairs_at(x):
            acc = join(acc, up)
    return acc


def truth_value(pref: Preference, rel: str, p: Lottery, q: Lottery, on: OpenSet) -> OpenSet:
    """The open set of ``on`` where the assertion can be made.

    ``prec`` is the strict truth value; ``sim`` is the meet of the two
    relative negations; ``preceq`` is the relative negation of the reversed
    strict assertion.
    """
    if rel == "prec":
        return meet(_strict_tv(pref, p, q, on), on)
    if rel == "sim":
        worse = _strict_tv(pref, p, q, on)
        better = _strict_tv(pref, q, p, on)
        return meet(not_within(worse, on), not_within(better, on))
    if rel == "preceq":
        return not_within(_strict_tv(pref, q, p, on), on)
    raise PreferenceError(f"unknown preference relation {rel}")


def _is_carrier(pref: Preference, u: OpenSet) -> bool:
    return u.is_full()


def forces(pref: Preference, rel: str, p: Lottery, q: Lottery, u: OpenSet) -> bool:
    """Does ``u`` force the assertion?

    For a ``proper_opens_only`` preference no strict ranking (and no
    indifference between distinct lotteries) is forced by the full carrier,
    whatever the truth value computes to on proper opens.
    """
    if u.is_empty():
        return True
    if (
        isinstance(pref, UtilityPreference)
        and pref.proper_opens_only
        and _is_carrier(pref, u)
        and not (rel == "sim" and lotteries_equal(p, q))
        and rel != "preceq"
    ):
        return False
    return truth_value(pref, rel, p, q, u) == meet(u, u)


def indifference_region(pref: Preference, family: Family, on: OpenSet) -> OpenSet:
    """Largest open of ``on`` where every family pair is forced indifferent."""
    region = on
    names = family.names()
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            region = meet(region, truth_value(pref, "sim", family.get(a), family.get(b), on))
    return region


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Finding:
    kind: str
    detail: str
    replay: Callable[[], bool] | None = field(default=None, compare=False)


@dataclass(frozen=True)
class AxiomReport:
    assumption: str
    passed: bool
    checked: int
    findings: tuple[Finding, ...] = ()

    def render(self) -> list[str]:
        verdict = "pass-on-tested" if self.passed else "counterexample"
        lines = [f"{self.assumption}: {verdict} ({self.checked} instances checked)"]
        for f in self.findings:
            lines.append(f"  {f.kind}: {f.detail}")
        return lines


def _ordered_pairs(names: Sequence[str]):
    for a in names:
        for b in names:
            if a != b:
                yield a, b


def _sample_sub_opens(u: OpenSet) -> list[OpenSet]:
    """Deterministic sub-opens of ``u`` for monotonicity checks."""
    if isinstance(u, PosetOpen):
        return list(iter_sub_opens(u))
    out: list[OpenSet] = [u]
    for comp in components(u):
        out.append(comp)
        atom = comp.atoms[0]
        third = (atom.hi - atom.lo) / 3
        left = Atom(atom.lo, atom.hi - third, atom.lo_closed, False)
        right = Atom(atom.lo + third, atom.hi, False, atom.hi_closed)
        out.append(IntervalOpen(u.space, (left,)))
        out.append(IntervalOpen(u.space, (right,)))
    return out


def _sample_covers(u: OpenSet) -> list[tuple[OpenSet, ...]]:
    """Deterministic open covers of ``u`` for local-character checks."""
    covers_out: list[tuple[OpenSet, ...]] = [(u,), canonical_cover(u)]
    if isinstance(u, IntervalOpen) and not u.is_empty():
        parts: list[OpenSet] = []
        for comp in components(u):
            atom = comp.atoms[0]
            third = (atom.hi - atom.lo) / 3
            parts.append(IntervalOpen(u.space, (Atom(atom.lo, atom.hi - third, atom.lo_closed, False),)))
            parts.append(IntervalOpen(u.space, (Atom(atom.lo + third, atom.hi, False, atom.hi_closed),)))
        covers_out.append(tuple(parts))
    return covers_out


def check_weak_order(pref: Preference, family: Family, on: OpenSet) -> AxiomReport:
    """Asymmetry, cover-form negative transitivity, restriction monotonicity,
    and local character, over the declared family."""
    findings: list[Finding] = []
    checked = 0
    names = family.names()
    tv = {
        (a, b): truth_value(pref, "prec", family.get(a), family.get(b), on)
        for a, b in _ordered_pairs(names)
    }
    for (a, b), t in tv.items():
        checked += 1
        clash = meet(t, tv[(b, a)])
        if not clash.is_empty():
            findings.append(
                Finding(
                    "asymmetry",
                    f"{a} < {b} and {b} < {a} both hold on {clash}",
                    lambda t=t, s=tv[(b, a)]: not meet(t, s).is_empty(),
                )
            )
    for (a, b), t in tv.items():
        for r in names:
            if r in (a, b):
                continue
            checked += 1
            cover = join(tv[(r, b)], tv[(a, r)])
            if not is_subset(t, cover):
                findings.append(
                    Finding(
                        "negative-transitivity",
                        f"[{a} < {b}] = {t} not within [{r} < {b}] ∪ [{a} < {r}] = {cover}",
                        lambda t=t, c=cover: not is_subset(t, c),
                    )
                )
    sub_opens = _sample_sub_opens(on)
    for (a, b), t in tv.items():
        for v in sub_opens:
            checked += 1
            local = truth_value(pref, "prec", family.get(a), family.get(b), v)
            if local != meet(t, v):
                findings.append(
                    Finding(
                        "monotonicity",
                        f"[{a} < {b}] on {v} is {local}, expected {meet(t, v)}",
                        lambda pref=pref, a=a, b=b, v=v, t=t: truth_value(
                            pref, "prec", family.get(a), family.get(b), v
                        )
                        != meet(t, v),
                    )
                )
    for a, b in _ordered_pairs(names):
        p, q = family.get(a), family.get(b)
        for cover in _sample_covers(on):
            checked += 1
            all_forced = all(
                forces(pref, "prec", restrict_lottery(p, v), restrict_lottery(q, v), v)
                for v in cover
            )
            if not all_forced:
                continue
            union = cover[0]
            for v in cover[1:]:
                union = join(union, v)
            if not forces(
                pref, "prec", restrict_lottery(p, union), restrict_lottery(q, union), union
            ):
                findings.append(
                    Finding(
                        "local-character",
                        f"{a} < {b} forced on each of {len(cover)} cover pieces of "
                        f"{union} but not on their union",
                        lambda pref=pref, p=p, q=q, cover=cover, union=union: (
                            all(
                                forces(
                                    pref,
                                    "prec",
                                    restrict_lottery(p, v),
                                    restrict_lottery(q, v),
                                    v,
                                )
                                for v in cover
                            )
                            and not forces(
                                pref,
                                "prec",
                                restrict_lottery(p, union),
                                restrict_lottery(q, union),
                                union,
                            )
                        ),
                    )
                )
    return AxiomReport("weak order", not findings, checked, tuple(findings))


def check_independence(
    pref: Preference, family: Family, mixers: Sequence[tuple[str, sec.Section]], on: OpenSet
) -> AxiomReport:
    """For every (p, q, r, a): where p < q holds, the a-mixtures with r hold too."""
    findings: list[Finding] = []
    checked = 0
    skipped = 0
    names = family.names()
    zero = sec.constant(on, Fraction(0))
    for mname, a in mixers:
        a_on = sec.restrict(a, on) if a.domain != on else a
        if sec.compare(zero, a_on, on).lt != on:
            raise PreferenceError(f"mixer {mname} is not strictly positive on {on}")
        if sec.negative_witness(sec.sub(sec.constant(on, Fraction(1)), a_on)) is not None:
            raise PreferenceError(f"mixer {mname} exceeds 1 on {on}")
    for pa, qa in _ordered_pairs(names):
        p, q = restrict_lottery(family.get(pa), on), restrict_lottery(family.get(qa), on)
        base = truth_value(pref, "prec", p, q, on)
        if base.is_empty():
            continue
        for ra in names:
            r = restrict_lottery(family.get(ra), on)
            for mname, a in mixers:
                a_on = sec.restrict(a, on) if a.domain != on else a
                checked += 1
                try:
                    mp = mix(a_on, p, r)
                    mq = mix(a_on, q, r)
                except sec.ExactnessError:
                    skipped += 1
                    continue
                if isinstance(pref, TabulatedPreference) and (
                    pref.family.resolve(mp) is None or pref.family.resolve(mq) is None
                ):
                    skipped += 1
                    continue
                mixed = truth_value(pref, "prec", mp, mq, on)
                if not is_subset(base, mixed):
                    findings.append(
                        Finding(
                            "independence",
                            f"[{pa} < {qa}] = {base} not within the {mname}-mixture "
                            f"truth value {mixed} (third lottery {ra})",
                            lambda pref=pref, base=base, mp=mp, mq=mq, on=on: not is_subset(
                                base, truth_value(pref, "prec", mp, mq, on)
                            ),
                        )
                    )
    report = AxiomReport("independence", not findings, checked, tuple(findings))
    if skipped:
        report = AxiomReport(
            "independence",
            report.passed,
            checked,
            report.findings
            + (Finding("note", f"{skipped} mixtures skipped (not piecewise-linear)"),),
        )
    return report


_DYADIC_DEPTH = 6
_MAX_PIECES = 64


def _dyadic_candidates() -> list[Fraction]:
    out = []
    for d in range(1, _DYADIC_DEPTH + 1):
        for k in range(1, 2**d, 2):
            out.append(Fraction(k, 2**d))
    return out


def _try_constants(pref, p, q, r, piece) -> tuple[Fraction, Fraction] | None:
    """Rational constants a, b in (0,1) witnessing continuity on one piece."""
    pr, qr, rr = (restrict_lottery(x, piece) for x in (p, q, r))
    found_a = found_b = None
    for cand in _dyadic_candidates():
        w = sec.constant(piece, cand)
        try:
            mixed = mix(w, pr, rr)
        except sec.ExactnessError:
            continue
        if isinstance(pref, TabulatedPreference) and pref.family.resolve(mixed) is None:
            continue
        if found_a is None and forces(pref, "prec", qr, mixed, piece):
            found_a = cand
        if found_b is None and forces(pref, "prec", mixed, qr, piece):
            found_b = cand
        if found_a is not None and found_b is not None:
            return found_a, found_b
    return None


def check_continuity(
    pref: Preference, family: Family, on: OpenSet, epsilon: Fraction = Fraction(1, 2**20)
) -> AxiomReport:
    """Search rational mixing constants over a cover for every strict chain.

    Pieces are bisected where no single constant works; a region thinner than
    ``epsilon`` with no witness is reported as a counterexample region.
    """
    findings: list[Finding] = []
    witnesses: list[Finding] = []
    checked = 0
    names = family.names()
    for pa in names:
        for qa in names:
            for ra in names:
                if len({pa, qa, ra}) != 3:
                    continue
                p, q, r = (family.get(n) for n in (pa, qa, ra))
                w = meet(
                    truth_value(pref, "prec", p, q, on),
                    truth_value(pref, "prec", q, r, on),
                )
                if w.is_empty():
                    continue
                checked += 1
                queue: list[OpenSet] = list(components(w))
                solved: list[str] = []
                local: list[Finding] = []
                budget = _MAX_PIECES
                while queue and budget:
                    piece = queue.pop(0)
                    budget -= 1
                    got = _try_constants(pref, p, q, r, piece)
                    if got is not None:
                        solved.append(f"{piece}: a={got[0]}, b={got[1]}")
                        continue
                    if isinstance(pref, TabulatedPreference):
                        # The table only ranks the declared family: a missing
                        # witness means the grid mixtures left the family, not
                        # that continuity is violated.
                        witnesses.append(
                            Finding(
                                "unresolved",
                                f"chain {pa} < {qa} < {ra}: no grid mixture on {piece} "
                                "resolves to a ranked family member",
                            )
                        )
                        continue
                    if isinstance(piece, PosetOpen):
                        local.append(
                            Finding(
                                "continuity",
                                f"chain {pa} < {qa} < {ra}: no rational witness on {piece}",
                            )
                        )
                        continue
                    atom = piece.atoms[0]
                    width = atom.hi - atom.lo
                    if width <= epsilon:
                        local.append(
                            Finding(
                                "continuity",
                                f"chain {pa} < {qa} < {ra}: grid exhausted at "
                                f"resolution {epsilon} on {piece}",
                            )
                        )
                        continue
                    third = width / 3
                    queue.append(
                        IntervalOpen(piece.space, (Atom(atom.lo, atom.hi - third, atom.lo_closed, False),))
                    )
                    queue.append(
                        IntervalOpen(piece.space, (Atom(atom.lo + third, atom.hi, False, atom.hi_closed),))
                    )
                if budget == 0 and queue:
                    local.append(
                        Finding(
                            "continuity",
                            f"chain {pa} < {qa} < {ra}: piece budget exhausted with "
                            f"{len(queue)} regions unresolved, first {queue[0]}",
                        )
                    )
                findings.extend(local)
                if solved and not local:
                    witnesses.append(
                        Finding(
                            "witness",
                            f"chain {pa} < {qa} < {ra}: " + "; ".join(solved),
                        )
                    )
    return AxiomReport(
        "continuity", not findings, checked, tuple(findings) + tuple(witnesses)
    )


def check_minimal_comparability(pref: Preference, family: Family, space: Space) -> AxiomReport:
    """Every point needs a neighborhood with a strict family pair or universal
    indifference; the first uncovered point is the witness."""
    findings: list[Finding] = []
    names = family.names()
    full = space.full()
    checked = 0
    if isinstance(space, PosetSpace):
        for x in space.points:
            up = minimal_open(space, x)
            checked += 1
            strict = any(
                forces(
                    pref,
                    "prec",
                    restrict_lottery(family.get(a), up),
                    restrict_lottery(family.get(b), up),
                    up,
                )
                for a, b in _ordered_pairs(names)
            )
            indiff = indifference_region(pref, family, up) == up
            if not strict and not indiff:
                findings.append(
                    Finding(
                        "minimal-comparability",
                        f"witness point {x}: minimal open {up} has no strict pair "
                        f"and is not all-indifferent",
                    )
                )
        return AxiomReport("minimal comparability", not findings, checked, tuple(findings))
    covered = indifference_region(pref, family, full)
    for a, b in _ordered_pairs(names):
        checked += 1
        covered = join(covered, truth_value(pref, "prec", family.get(a), family.get(b), full))
    if covered != full:
        gaps = atoms_complement(space, covered.atoms)
        witness = gaps[0].lo if gaps[0].lo_closed or gaps[0].is_point() else gaps[0].sample()
        findings.append(
            Finding(
                "minimal-comparability",
                f"witness point {witness}: no neighborhood with a strict pair or "
                f"universal indifference (uncovered region {' ∪ '.join(str(g) for g in gaps)})",
            )
        )
    return AxiomReport("minimal comparability", not findings, checked, tuple(findings))


def check_assumption6(pref: Preference, family: Family, space: Space) -> AxiomReport:
    """Search the family for global compatible calibration pairs.

    The engine restricts quantifier witnesses to restrictions of the declared
    global members: it passes when some family pair's strict truth value,
    together with the all-indifference region, covers the carrier.
    """
    full = space.full()
    names = family.names()
    indiff = indifference_region(pref, family, full)
    checked = 0
    if indiff == full:
        return AxiomReport(
            "global calibration pair",
            True,
            1,
            (Finding("witness", "all family pairs indifferent: trivial cover {X}"),),
        )
    for a, b in _ordered_pairs(names):
        checked += 1
        strict = truth_value(pref, "prec", family.get(a), family.get(b), full)
        if join(strict, indiff) == full:
            if strict == full:
                detail = f"{a} < {b} forced on the whole carrier"
            else:
                detail = f"cover {{{strict}, {indiff}}} with {a} < {b} on the first piece"
            return AxiomReport(
                "global calibration pair", True, checked, (Finding("witness", detail),)
            )
    uncovered_desc: list[str] = []
    for a, b in _ordered_pairs(names):
        strict = truth_value(pref, "prec", family.get(a), family.get(b), full)
        gap = not_within(join(strict, indiff), full)
        uncovered_desc.append(f"[{a} < {b}] ∪ indifference misses e.g. {gap}")
        break
    return AxiomReport(
        "global calibration pair",
        False,
        checked,
        (
            Finding(
                "no-cover",
                "no family pair is strictly forced alongside all-indifference on a "
                "cover of the carrier"
                + (f" ({uncovered_desc[0]})" if uncovered_desc else ""),
            ),
        ),
    )


def check_assumption7(pref: Preference, family: Family, space: Space) -> AxiomReport:
    """Constant lotteries must compare globally: every truth value all-or-nothing."""
    full = space.full()
    names = family.names()
    for n in names:
        if not is_constant_lottery(family.get(n)):
            raise PreferenceError(f"{n} is not a constant lottery")
    findings: list[Finding] = []
    checked = 0
    empty_or_full = lambda t: t.is_empty() or t == full
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            checked += 1
            p, q = family.get(a), family.get(b)
            t1 = truth_value(pref, "prec", p, q, full)
            t2 = truth_value(pref, "prec", q, p, full)
            t3 = truth_value(pref, "sim", p, q, full)
            bad = [
                (label, t)
                for label, t in ((f"{a} < {b}", t1), (f"{b} < {a}", t2), (f"{a} ~ {b}", t3))
                if not empty_or_full(t)
            ]
            if bad:
                label, t = bad[0]
                findings.append(
                    Finding(
                        "constant-comparison",
                        f"violator pair ({a}, {b}): [{label}] = {t} is neither the "
                        "carrier nor empty",
                    )
                )
            elif join(join(t1, t2), t3) != full:
                findings.append(
                    Finding(
                        "constant-comparison",
                        f"violator pair ({a}, {b}): the three truth values do not "
                        "cover the carrier",
                    )
                )
    return AxiomReport("constant prize comparison", not findings, checked, tuple(findings))
