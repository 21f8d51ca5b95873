"""Scenario files: a line-oriented declarative format and its runner.

A scenario declares one space, prizes, named sections/lotteries/opens,
families, a preference, and an ordered list of tasks.  Rationals are written
``p/q``, intervals ``[a,b)`` style, finite opens ``{x y}``.  Running executes
the tasks in order and produces a deterministic plain-text report plus CSV
plot data; expected verdicts (``expect obstruction`` and friends) make
negative results count as task successes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from . import sections as sec
from .complexes import (
    FaceChart,
    FaceComplex,
    HarmonizationObstruction,
    HarmonizationResult,
    harmonize_complex,
)
from .forcing import EvalContext, ForcingError, check_forcing_laws, eval_formula, parse_formula
from .lotteries import Lottery, LotteryError, PrizeSet, delta, lottery_make
from .preference import (
    AxiomReport,
    Family,
    Preference,
    PreferenceError,
    TabulatedPreference,
    UtilityPreference,
    check_assumption6,
    check_assumption7,
    check_continuity,
    check_independence,
    check_minimal_comparability,
    check_weak_order,
    truth_value,
)
from .representation import (
    DEFAULT_EPSILON,
    CalibrationError,
    ClassicalRejection,
    ClassicalResult,
    GlobalRep,
    GlueRepObstruction,
    LocalRep,
    PLT,
    RepFailure,
    RepresentationError,
    TransformObstruction,
    check_monotonicity,
    classical_representation,
    constant_prize_representation,
    glue_representations,
    local_representation,
    solve_calibration,
    uniqueness_transform,
)
from .topology import (
    Atom,
    IntervalOpen,
    IntervalSpace,
    OpenSet,
    PosetOpen,
    PosetSpace,
    Space,
    TopologyError,
    canonical_cover,
    components,
    heyting,
    interval_space,
    is_classical,
    minimal_open,
    space_from_poset,
)

__all__ = ["ScenarioError", "Scenario", "Task", "TaskOutcome", "RunResult", "parse_scenario", "run_scenario"]


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


GOOD_KINDS = {"ok", "pass", "classical", "non_classical", "value"}
EXPECT_KINDS = GOOD_KINDS | {
    "counterexample",
    "failure",
    "obstruction",
    "rejected",
    "error",
    "fail",
}


@dataclass(frozen=True)
class Task:
    line: int
    words: tuple[str, ...]
    expect_kind: str | None
    expect_value: str | None

    def text(self) -> str:
        return " ".join(self.words)


@dataclass
class Scenario:
    name: str
    space: Space
    prizes: PrizeSet | None = None
    sections: dict[str, sec.Section] = field(default_factory=dict)
    lotteries: dict[str, Lottery] = field(default_factory=dict)
    opens: dict[str, OpenSet] = field(default_factory=dict)
    families: dict[str, tuple[str, ...]] = field(default_factory=dict)
    preference: Preference | None = None
    reps: dict[str, LocalRep] = field(default_factory=dict)
    complexes: dict[str, FaceComplex] = field(default_factory=dict)
    epsilon: Fraction = DEFAULT_EPSILON
    plot_grid: int = 0
    tasks: list[Task] = field(default_factory=list)


@dataclass(frozen=True)
class TaskOutcome:
    index: int
    title: str
    kind: str
    primary: str
    lines: tuple[str, ...]
    ok: bool


@dataclass(frozen=True)
class RunResult:
    scenario: str
    outcomes: tuple[TaskOutcome, ...]
    report: str
    exit_code: int
    artifacts: tuple[tuple[str, str, object], ...]  # (name, kind, payload)


# ---------------------------------------------------------------------------
# Low-level parsing helpers


def _rat(text: str, line: int) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ScenarioError(f"not a rational: {text!r}", line) from None


def _parse_atom(text: str, line: int) -> Atom:
    if len(text) < 3 or text[0] not in "[(" or text[-1] not in ")]":
        raise ScenarioError(f"not an interval: {text!r}", line)
    body = text[1:-1].split(",")
    if len(body) != 2:
        raise ScenarioError(f"interval needs two endpoints: {text!r}", line)
    return Atom(
        _rat(body[0], line), _rat(body[1], line), text[0] == "[", text[-1] == "]"
    )


def _parse_open(space: Space, words: list[str], line: int) -> OpenSet:
    if isinstance(space, PosetSpace):
        joined = " ".join(words)
        if not (joined.startswith("{") and joined.endswith("}")):
            raise ScenarioError(f"finite open must be {{points}}: {joined!r}", line)
        pts = joined[1:-1].replace(",", " ").split()
        try:
            return space.open_from_points(pts)
        except TopologyError as exc:
            raise ScenarioError(str(exc), line) from None
    if words == ["{}"] or words == ["∅"]:
        return space.empty()
    try:
        return space.open_from_atoms(_parse_atom(w, line) for w in words)
    except TopologyError as exc:
        raise ScenarioError(str(exc), line) from None


# ---------------------------------------------------------------------------
# Scenario parsing


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    lines = text.splitlines()
    idx = 0
    scenario: Scenario | None = None

    def strip(line: str) -> str:
        if "#" in line:
            line = line[: line.index("#")]
        return line.strip()

    def need_scenario(line_no: int) -> Scenario:
        if scenario is None:
            raise ScenarioError("the space block must come first", line_no)
        return scenario

    def read_block(start: int) -> tuple[list[tuple[int, list[str]]], int]:
        body = []
        j = start + 1
        while j < len(lines):
            raw = strip(lines[j])
            if raw == "end":
                return body, j + 1
            if raw:
                body.append((j + 1, raw.split()))
            j += 1
        raise ScenarioError("unterminated block", start + 1)

    while idx < len(lines):
        line_no = idx + 1
        raw = strip(lines[idx])
        if not raw:
            idx += 1
            continue
        words = raw.split()
        head = words[0]
        if head == "space":
            if scenario is not None:
                raise ScenarioError("only one space per scenario", line_no)
            if len(words) >= 2 and words[1] == "interval":
                if len(words) != 4:
                    raise ScenarioError("usage: space interval LO HI", line_no)
                space = interval_space(_rat(words[2], line_no), _rat(words[3], line_no))
                scenario = Scenario(name, space)
                idx += 1
            elif len(words) == 2 and words[1] == "poset":
                body, nxt = read_block(idx)
                points: list[str] = []
                pairs: list[tuple[str, str]] = []
                for ln, ws in body:
                    if ws[0] == "points":
                        points.extend(ws[1:])
                    elif ws[0] == "below" and len(ws) == 3:
                        pairs.append((ws[1], ws[2]))
                    else:
                        raise ScenarioError(f"unknown poset line: {' '.join(ws)}", ln)
                try:
                    space = space_from_poset(points, pairs)
                except TopologyError as exc:
                    raise ScenarioError(str(exc), line_no) from None
                scenario = Scenario(name, space)
                idx = nxt
            else:
                raise ScenarioError("usage: space poset ... end | space interval LO HI", line_no)
            scenario.opens["X"] = scenario.space.full()
            continue
        sc = need_scenario(line_no)
        if head == "prizes":
            try:
                sc.prizes = PrizeSet(tuple(words[1:]))
            except LotteryError as exc:
                raise ScenarioError(str(exc), line_no) from None
            idx += 1
        elif head == "epsilon":
            sc.epsilon = _rat(words[1], line_no)
            idx += 1
        elif head == "plot_grid":
            sc.plot_grid = int(words[1])
            idx += 1
        elif head == "open":
            if len(words) < 4 or words[2] != "=":
                raise ScenarioError("usage: open NAME = ...", line_no)
            sc.opens[words[1]] = _parse_open(sc.space, words[3:], line_no)
            idx += 1
        elif head == "section":
            oname = "X"
            rest = words[1:]
            if "on" in rest:
                k = rest.index("on")
                oname = rest[k + 1]
                rest = rest[:k] + rest[k + 2 :]
            sname = rest[0]
            domain = _named_open(sc, oname, line_no)
            if len(rest) >= 3 and rest[1] == "const":
                sc.sections[sname] = sec.constant(domain, _rat(rest[2], line_no))
                idx += 1
                continue
            body, nxt = read_block(idx)
            knots: list[tuple[Fraction, Fraction]] = []
            values: dict[str, Fraction] = {}
            for ln, ws in body:
                if ws[0] == "bp" and len(ws) == 3:
                    knots.append((_rat(ws[1], ln), _rat(ws[2], ln)))
                elif ws[0] == "at" and len(ws) == 3:
                    values[ws[1]] = _rat(ws[2], ln)
                else:
                    raise ScenarioError(f"unknown section line: {' '.join(ws)}", ln)
            try:
                if isinstance(sc.space, PosetSpace):
                    sc.sections[sname] = sec.from_point_values(domain, values)
                else:
                    sc.sections[sname] = sec.from_breakpoints(domain, knots)
            except sec.SectionError as exc:
                raise ScenarioError(str(exc), line_no) from None
            idx = nxt
        elif head == "delta":
            if sc.prizes is None:
                raise ScenarioError("declare prizes before lotteries", line_no)
            oname = "X"
            rest = words[1:]
            if "on" in rest:
                k = rest.index("on")
                oname = rest[k + 1]
                rest = rest[:k]
            if len(rest) != 2:
                raise ScenarioError("usage: delta NAME PRIZE [on OPEN]", line_no)
            try:
                sc.lotteries[rest[0]] = delta(sc.prizes, _named_open(sc, oname, line_no), rest[1])
            except LotteryError as exc:
                raise ScenarioError(str(exc), line_no) from None
            idx += 1
        elif head == "lottery":
            if sc.prizes is None:
                raise ScenarioError("declare prizes before lotteries", line_no)
            oname = "X"
            rest = words[1:]
            if "on" in rest:
                k = rest.index("on")
                oname = rest[k + 1]
                rest = rest[:k]
            lname = rest[0]
            domain = _named_open(sc, oname, line_no)
            body, nxt = read_block(idx)
            coords: dict[str, sec.Section] = {}
            for ln, ws in body:
                if len(ws) == 3 and ws[1] == "const":
                    coords[ws[0]] = sec.constant(domain, _rat(ws[2], ln))
                elif len(ws) == 3 and ws[1] == "section":
                    coords[ws[0]] = _named_section(sc, ws[2], ln)
                else:
                    raise ScenarioError(f"unknown lottery line: {' '.join(ws)}", ln)
            try:
                sc.lotteries[lname] = lottery_make(sc.prizes, domain, coords)
            except LotteryError as exc:
                raise ScenarioError(str(exc), line_no) from None
            idx = nxt
        elif head == "family":
            if len(words) < 4 or words[2] != "=":
                raise ScenarioError("usage: family NAME = member...", line_no)
            sc.families[words[1]] = tuple(words[3:])
            idx += 1
        elif head == "preference":
            if sc.preference is not None:
                raise ScenarioError("only one preference per scenario", line_no)
            if len(words) >= 2 and words[1] == "utility":
                body, nxt = read_block(idx)
                weights: list[tuple[str, sec.Section]] = []
                proper_only = False
                for ln, ws in body:
                    if ws[0] == "weight" and len(ws) == 3:
                        weights.append((ws[1], _named_section(sc, ws[2], ln)))
                    elif ws == ["proper_opens_only"]:
                        proper_only = True
                    else:
                        raise ScenarioError(f"unknown preference line: {' '.join(ws)}", ln)
                if sc.prizes is None:
                    raise ScenarioError("declare prizes before the preference", line_no)
                try:
                    sc.preference = UtilityPreference(sc.prizes, tuple(weights), proper_only)
                except PreferenceError as exc:
                    raise ScenarioError(str(exc), line_no) from None
                idx = nxt
            elif len(words) == 4 and words[1] == "tabulated" and words[2] == "using":
                fam = _named_family(sc, words[3], line_no)
                body, nxt = read_block(idx)
                table: dict[str, list[tuple[str, str]]] = {}
                for ln, ws in body:
                    if len(ws) >= 4 and ws[0] == "at" and ws[2] == "chain":
                        chain = ws[3:]
                        table.setdefault(ws[1], []).extend(
                            (a, b) for i, a in enumerate(chain) for b in chain[i + 1 :]
                        )
                    elif len(ws) == 5 and ws[0] == "at" and ws[2] == "pair":
                        table.setdefault(ws[1], []).append((ws[3], ws[4]))
                    else:
                        raise ScenarioError(f"unknown table line: {' '.join(ws)}", ln)
                if not isinstance(sc.space, PosetSpace):
                    raise ScenarioError("tabulated preferences need a finite space", line_no)
                try:
                    sc.preference = TabulatedPreference(
                        sc.space, fam, tuple((p, tuple(ps)) for p, ps in table.items())
                    )
                except PreferenceError as exc:
                    raise ScenarioError(str(exc), line_no) from None
                idx = nxt
            else:
                raise ScenarioError(
                    "usage: preference utility ... end | preference tabulated using FAMILY ... end",
                    line_no,
                )
        elif head == "rep":
            oname = "X"
            rest = words[1:]
            if "on" in rest:
                k = rest.index("on")
                oname = rest[k + 1]
                rest = rest[:k]
            rname = rest[0]
            domain = _named_open(sc, oname, line_no)
            body, nxt = read_block(idx)
            weights: list[tuple[str, sec.Section]] = []
            for ln, ws in body:
                if len(ws) == 3 and ws[1] == "const":
                    weights.append((ws[0], sec.constant(domain, _rat(ws[2], ln))))
                elif len(ws) == 3 and ws[1] == "section":
                    s = _named_section(sc, ws[2], ln)
                    if s.domain != domain:
                        s = sec.restrict(s, domain)
                    weights.append((ws[0], s))
                else:
                    raise ScenarioError(f"unknown rep line: {' '.join(ws)}", ln)
            if sc.prizes is None:
                raise ScenarioError("declare prizes before reps", line_no)
            sc.reps[rname] = LocalRep(domain, sc.prizes, tuple(weights), ())
            idx = nxt
        elif head == "complex":
            cname = words[1]
            body, nxt = read_block(idx)
            faces: list[FaceChart] = []
            for ln, ws in body:
                if ws[0] != "face" or ":" not in ws:
                    raise ScenarioError(f"unknown complex line: {' '.join(ws)}", ln)
                colon = ws.index(":")
                fname = ws[1]
                spec = ws[colon + 1 :]
                vertices = tuple(fname)
                if spec == ["derive"]:
                    faces.append(FaceChart(fname, vertices, None))
                else:
                    values = []
                    for item in spec:
                        if "=" not in item:
                            raise ScenarioError(f"face value must be v=rational: {item}", ln)
                        v, val = item.split("=", 1)
                        values.append((v, _rat(val, ln)))
                    faces.append(FaceChart(fname, vertices, tuple(values)))
            sc.complexes[cname] = FaceComplex(tuple(faces))
            idx = nxt
        elif head == "task":
            expect_kind = None
            expect_value = None
            body_words = words[1:]
            if "expect" in body_words:
                k = body_words.index("expect")
                expectation = body_words[k + 1 :]
                body_words = body_words[:k]
                if not expectation:
                    raise ScenarioError("empty expectation", line_no)
                if expectation[0] == "value":
                    expect_kind = "value"
                    expect_value = " ".join(expectation[1:])
                elif expectation[0] in EXPECT_KINDS:
                    expect_kind = expectation[0]
                    if len(expectation) > 1:
                        expect_value = " ".join(expectation[1:])
                else:
                    raise ScenarioError(f"unknown expectation {expectation[0]!r}", line_no)
            sc.tasks.append(Task(line_no, tuple(body_words), expect_kind, expect_value))
            idx += 1
        else:
            raise ScenarioError(f"unknown declaration {head!r}", line_no)
    if scenario is None:
        raise ScenarioError("scenario has no space block", 1)
    return scenario


def _named_open(sc: Scenario, name: str, line: int) -> OpenSet:
    if name in sc.opens:
        return sc.opens[name]
    raise ScenarioError(f"unknown open {name!r}", line)


def _named_section(sc: Scenario, name: str, line: int) -> sec.Section:
    if name in sc.sections:
        return sc.sections[name]
    raise ScenarioError(f"unknown section {name!r}", line)


def _named_lottery(sc: Scenario, name: str, line: int) -> Lottery:
    if name in sc.lotteries:
        return sc.lotteries[name]
    raise ScenarioError(f"unknown lottery {name!r}", line)


def _named_family(sc: Scenario, name: str, line: int) -> Family:
    if name not in sc.families:
        raise ScenarioError(f"unknown family {name!r}", line)
    members = []
    for m in sc.families[name]:
        members.append((m, _named_lottery(sc, m, line)))
    return Family(tuple(members))


def _mixer_family(sc: Scenario, name: str, line: int) -> tuple[tuple[str, sec.Section], ...]:
    if name not in sc.families:
        raise ScenarioError(f"unknown family {name!r}", line)
    return tuple((m, _named_section(sc, m, line)) for m in sc.families[name])


# ---------------------------------------------------------------------------
# Task execution


class _Runner:
    def __init__(self, sc: Scenario):
        self.sc = sc
        self.artifacts: list[tuple[str, str, object]] = []
        self.built_reps: dict[str, LocalRep | GlobalRep] = dict(sc.reps)

    def context(self) -> EvalContext:
        fams = {
            name: _named_family(self.sc, name, 0)
            for name in self.sc.families
            if all(m in self.sc.lotteries for m in self.sc.families[name])
        }
        return EvalContext(self.sc.preference, self.sc.sections, self.sc.lotteries, fams)

    def add_artifact(self, name: str, kind: str, payload) -> None:
        taken = {n for n, _, _ in self.artifacts}
        if name in taken:
            name = f"{name}_{len(self.artifacts)}"
        self.artifacts.append((name, kind, payload))

    def pref(self, line: int) -> Preference:
        if self.sc.preference is None:
            raise ScenarioError("no preference declared", line)
        return self.sc.preference

    # -- individual tasks ---------------------------------------------------

    def run_task(self, task: Task) -> tuple[str, str, list[str]]:
        """Returns (kind, primary, extra lines)."""
        w = list(task.words)
        if not w:
            raise ScenarioError("empty task", task.line)
        head = w[0]
        handler = getattr(self, f"task_{head}", None)
        if handler is None:
            raise ScenarioError(f"unknown task {head!r}", task.line)
        return handler(w[1:], task.line)

    def _split_on(self, w: list[str], line: int, keyword: str = "on") -> tuple[list[str], OpenSet]:
        if keyword not in w:
            return w, self.sc.space.full()
        k = w.index(keyword)
        return w[:k] + w[k + 2 :], _named_open(self.sc, w[k + 1], line)

    def task_truth_value(self, w, line):
        w, on = self._split_on(w, line)
        if len(w) != 3 or w[0] not in ("prec", "sim", "preceq"):
            raise ScenarioError("usage: truth_value REL P Q [on U]", line)
        p = _named_lottery(self.sc, w[1], line)
        q = _named_lottery(self.sc, w[2], line)
        tv = truth_value(self.pref(line), w[0], p, q, on)
        self.add_artifact(f"tv_{w[0]}_{w[1]}_{w[2]}", "open", tv)
        return "value", str(tv), []

    def task_eval(self, w, line):
        w, on = self._split_on(w, line)
        try:
            formula = parse_formula(" ".join(w))
            tv = eval_formula(formula, on, self.context())
        except ForcingError as exc:
            return "error", str(exc), []
        self.add_artifact("eval", "open", tv)
        return "value", str(tv), []

    def task_compare(self, w, line):
        w, on = self._split_on(w, line)
        if len(w) != 2:
            raise ScenarioError("usage: compare F G [on U]", line)
        f = _named_section(self.sc, w[0], line)
        g = _named_section(self.sc, w[1], line)
        got = sec.compare(f, g, on)
        self.add_artifact(w[0], "section", f)
        self.add_artifact(w[1], "section", g)
        self.add_artifact("lt", "open", got.lt)
        self.add_artifact("gt", "open", got.gt)
        self.add_artifact("eq", "open", got.eq)
        return "value", f"lt {got.lt} ; gt {got.gt} ; eq {got.eq}", []

    def task_heyting(self, w, line):
        if len(w) < 2:
            raise ScenarioError("usage: heyting OP U [V]", line)
        u = _named_open(self.sc, w[1], line)
        v = _named_open(self.sc, w[2], line) if len(w) > 2 else None
        try:
            got = heyting(w[0], u, v)
        except TopologyError as exc:
            return "error", str(exc), []
        return "value", str(got), []

    def task_components(self, w, line):
        u = _named_open(self.sc, w[0], line)
        comps = components(u)
        return "value", f"{len(comps)} components: " + " ; ".join(str(c) for c in comps), []

    def task_minimal_open(self, w, line):
        got = minimal_open(self.sc.space, w[0])
        return "value", str(got), []

    def task_is_classical(self, w, line):
        verdict = is_classical(self.sc.space)
        if verdict.classical:
            return "classical", "classical", []
        return "non_classical", f"non_classical witness {verdict.witness}", []

    def _axiom_outcome(self, report: AxiomReport) -> tuple[str, str, list[str]]:
        kind = "pass" if report.passed else "counterexample"
        lines = report.render()
        return kind, lines[0], lines[1:]

    def task_check(self, w, line):
        if not w:
            raise ScenarioError("usage: check WHAT ...", line)
        what = w[0]
        rest = w[1:]
        pref = self.pref(line)
        if what == "weak_order":
            rest, on = self._split_on(rest, line)
            fam = _named_family(self.sc, rest[0], line)
            return self._axiom_outcome(check_weak_order(pref, fam, on))
        if what == "independence":
            rest, on = self._split_on(rest, line)
            if "mixers" not in rest:
                raise ScenarioError("usage: check independence FAM mixers M [on U]", line)
            k = rest.index("mixers")
            fam = _named_family(self.sc, rest[0], line)
            mixers = _mixer_family(self.sc, rest[k + 1], line)
            try:
                return self._axiom_outcome(check_independence(pref, fam, mixers, on))
            except PreferenceError as exc:
                return "error", str(exc), []
        if what == "continuity":
            rest, on = self._split_on(rest, line)
            fam = _named_family(self.sc, rest[0], line)
            return self._axiom_outcome(check_continuity(pref, fam, on, self.sc.epsilon))
        if what == "minimal_comparability":
            fam = _named_family(self.sc, rest[0], line)
            report = check_minimal_comparability(pref, fam, self.sc.space)
            kind, primary, lines = self._axiom_outcome(report)
            if kind == "counterexample":
                kind = "fail"
            return kind, primary, lines
        if what == "assumption6":
            fam = _named_family(self.sc, rest[0], line)
            report = check_assumption6(pref, fam, self.sc.space)
            kind, primary, lines = self._axiom_outcome(report)
            if kind == "counterexample":
                kind = "fail"
            return kind, primary, lines
        if what == "assumption7":
            fam = _named_family(self.sc, rest[0], line)
            try:
                report = check_assumption7(pref, fam, self.sc.space)
            except PreferenceError as exc:
                return "error", str(exc), []
            kind, primary, lines = self._axiom_outcome(report)
            if kind == "counterexample":
                kind = "fail"
            return kind, primary, lines
        raise ScenarioError(f"unknown check {what!r}", line)

    def task_forcing_laws(self, w, line):
        if "cover" not in w:
            raise ScenarioError("usage: forcing_laws FORMULA on U cover U1 U2 ...", line)
        k = w.index("cover")
        cover = tuple(_named_open(self.sc, n, line) for n in w[k + 1 :])
        w, on = self._split_on(w[:k], line)
        formula = parse_formula(" ".join(w))
        report = check_forcing_laws(formula, on, cover, self.context())
        kind = "pass" if report.passed else "counterexample"
        primary = (
            f"monotonicity {'ok' if report.monotonicity_ok else 'VIOLATED'}, "
            f"local character {'ok' if report.local_character_ok else 'VIOLATED'}"
        )
        return kind, primary, list(report.details)

    def task_monotonicity_mixture(self, w, line):
        w, on = self._split_on(w, line)
        if len(w) != 4:
            raise ScenarioError("usage: monotonicity_mixture P Q A B [on U]", line)
        p = _named_lottery(self.sc, w[0], line)
        q = _named_lottery(self.sc, w[1], line)
        a = _named_section(self.sc, w[2], line)
        b = _named_section(self.sc, w[3], line)
        verdict = check_monotonicity(self.pref(line), p, q, a, b, on)
        return ("pass" if verdict.passed else "failure"), verdict.detail, []

    def task_calibrate(self, w, line):
        w, on = self._split_on(w, line)
        if len(w) != 3:
            raise ScenarioError("usage: calibrate P Q R [on U]", line)
        p, q, r = (_named_lottery(self.sc, n, line) for n in w)
        try:
            res = solve_calibration(self.pref(line), p, q, r, on, self.sc.epsilon)
        except CalibrationError as exc:
            return "error", str(exc), []
        self.add_artifact(f"calibration_{w[1]}", "section", res.weight)
        lines = [c.render() for c in res.certificate]
        kind_note = "exact closed form" if res.exact else "interpolated"
        return (
            "value",
            f"weight {_render_section(res.weight)} ({kind_note}, max gap {res.max_gap()})",
            lines,
        )

    def _calib_and_family(self, w, line):
        calib = None
        fam = None
        if "calib" in w:
            k = w.index("calib")
            calib = (w[k + 1], w[k + 2])
            w = w[:k] + w[k + 3 :]
        if "family" in w:
            k = w.index("family")
            fam = _named_family(self.sc, w[k + 1], line)
            w = w[:k] + w[k + 2 :]
        if fam is None:
            raise ScenarioError("a family is required", line)
        return w, calib, fam

    def task_represent(self, w, line):
        name = w[0]
        w, on = self._split_on(w[1:], line)
        w, calib, fam = self._calib_and_family(w, line)
        built = local_representation(self.pref(line), on, fam, calib, self.sc.epsilon)
        if isinstance(built, RepFailure):
            return "failure", str(built), []
        self.built_reps[name] = built
        lines = [c.render() for c in built.calibrations]
        for z, s in built.weights:
            self.add_artifact(f"{name}_{z}", "section", s)
            lines.append(f"u({z}) = {_render_section(s)}")
        return "ok", f"representation {name} on {built.domain}", lines

    def task_glue_reps(self, w, line):
        if w[0] != "target":
            raise ScenarioError("usage: glue_reps target U [cover C1 C2 ...] calib P Q family F", line)
        target = _named_open(self.sc, w[1], line)
        w = w[2:]
        cover: tuple[OpenSet, ...]
        if "cover" in w:
            k = w.index("cover")
            names = []
            j = k + 1
            while j < len(w) and w[j] not in ("calib", "family"):
                names.append(w[j])
                j += 1
            cover = tuple(_named_open(self.sc, n, line) for n in names)
            w = w[:k] + w[j:]
        else:
            cover = canonical_cover(target)
        w, calib, fam = self._calib_and_family(w, line)
        built = glue_representations(self.pref(line), fam, cover, target, calib, self.sc.epsilon)
        if isinstance(built, GlueRepObstruction):
            return "obstruction", str(built), []
        lines = list(built.notes)
        for z, s in built.weights:
            self.add_artifact(f"glued_{z}", "section", s)
            lines.append(f"u({z}) = {_render_section(s)}")
        return "ok", f"global representation on {built.domain} from {len(cover)} charts", lines

    def task_transform(self, w, line):
        w, on = self._split_on(w, line)
        if len(w) != 2:
            raise ScenarioError("usage: transform REPA REPB [on U]", line)
        rep_a = self._rep(w[0], line)
        rep_b = self._rep(w[1], line)
        got = uniqueness_transform(rep_a, rep_b, on)
        if isinstance(got, TransformObstruction):
            lines = [
                f"partial on {region}: {desc}" for region, _, desc in got.partials
            ]
            return "obstruction", str(got), lines
        self.add_artifact("plt_scale", "section", got.scale)
        self.add_artifact("plt_shift", "section", got.shift)
        return (
            "ok",
            f"scale {_render_section(got.scale)} ; shift {_render_section(got.shift)}",
            [],
        )

    def _rep(self, name: str, line: int):
        if name in self.built_reps:
            return self.built_reps[name]
        raise ScenarioError(f"unknown representation {name!r}", line)

    def task_classical_rep(self, w, line):
        w, _, fam = self._calib_and_family(w, line)
        result = classical_representation(self.pref(line), fam, self.sc.space, (), self.sc.epsilon)
        if isinstance(result, ClassicalRejection):
            return "rejected", str(result), []
        lines = [f"all-indifferent region: {result.indifferent_region}"]
        lines += list(result.indicator_checks)
        for z, s in result.rep.weights:
            self.add_artifact(f"classical_{z}", "section", s)
            lines.append(f"u({z}) = {_render_section(s)}")
        lines += list(result.axiom_notes)
        self.built_reps["classical"] = result.rep
        return "ok", f"classical representation on {result.rep.domain}", lines

    def task_constant_rep(self, w, line):
        if len(w) != 6 or w[0] != "family" or w[2] != "worst" or w[4] != "best":
            raise ScenarioError("usage: constant_rep family F worst D best D", line)
        fam = _named_family(self.sc, w[1], line)
        result = constant_prize_representation(
            self.pref(line), fam, self.sc.space, w[3], w[5], self.sc.epsilon
        )
        if isinstance(result, ClassicalRejection):
            return "rejected", str(result), []
        lines = list(result.notes)
        for z, s in result.weights:
            self.add_artifact(f"constant_{z}", "section", s)
            lines.append(f"u({z}) = {_render_section(s)}")
        self.built_reps["constant"] = result
        return "ok", "constant prize weights recovered", lines

    def task_harmonize(self, w, line):
        if w[0] not in self.sc.complexes:
            raise ScenarioError(f"unknown complex {w[0]!r}", line)
        got = harmonize_complex(self.sc.complexes[w[0]])
        if isinstance(got, HarmonizationObstruction):
            return "obstruction", str(got), []
        lines = []
        for chart in got.charts:
            vals = ", ".join(f"{v}={chart.value(v)}" for v in chart.vertices)
            lines.append(f"chart {chart.name}: {vals}")
        for a, b, m in got.maps:
            if a != b:
                lines.append(f"map {a} -> {b}: {m}")
        return (
            "ok",
            f"harmonized {len(got.charts)} faces; {got.functorial_checks} functoriality checks",
            lines,
        )


def _render_section(s: sec.Section) -> str:
    if isinstance(s, sec.PosetSection):
        return "(" + ", ".join(f"{p}: {v}" for p, v in s.values) + ")"
    parts = []
    for piece in s.pieces:
        if piece.slope == 0:
            parts.append(f"{piece.intercept} on {piece.atom}")
        else:
            sign = "+" if piece.intercept >= 0 else "-"
            parts.append(f"{piece.slope}x {sign} {abs(piece.intercept)} on {piece.atom}")
    return "; ".join(parts)


def run_scenario(sc: Scenario) -> RunResult:
    runner = _Runner(sc)
    outcomes: list[TaskOutcome] = []
    for i, task in enumerate(sc.tasks, start=1):
        title = task.text()
        try:
            kind, primary, lines = runner.run_task(task)
        except ScenarioError:
            raise
        except (
            TopologyError,
            sec.SectionError,
            LotteryError,
            PreferenceError,
            ForcingError,
            RepresentationError,
        ) as exc:
            kind, primary, lines = "error", str(exc), []
        if task.expect_kind is not None:
            if task.expect_kind == "value":
                ok = primary == task.expect_value
                status = "ok (value as expected)" if ok else (
                    f"MISMATCH: expected value {task.expect_value!r}"
                )
            else:
                ok = kind == task.expect_kind
                if ok and task.expect_value is not None:
                    ok = task.expect_value in primary or any(
                        task.expect_value in ln for ln in lines
                    )
                    status = (
                        f"ok (expected {task.expect_kind}, detail matched)"
                        if ok
                        else f"MISMATCH: {task.expect_kind} lacks detail {task.expect_value!r}"
                    )
                else:
                    status = (
                        f"ok (expected {task.expect_kind})"
                        if ok
                        else f"MISMATCH: expected {task.expect_kind}, got {kind}"
                    )
        else:
            ok = kind in GOOD_KINDS
            status = "ok" if ok else f"FAILED ({kind})"
        outcomes.append(
            TaskOutcome(i, title, kind, primary, tuple(lines) + (f"status: {status}",), ok)
        )
    report = _render_report(sc, outcomes)
    exit_code = 0 if all(o.ok for o in outcomes) else 1
    return RunResult(sc.name, tuple(outcomes), report, exit_code, tuple(runner.artifacts))


def _render_report(sc: Scenario, outcomes: list[TaskOutcome]) -> str:
    lines = [
        "variable-lottery scenario report",
        f"scenario: {sc.name}",
        f"space: {_render_space(sc.space)}",
        f"epsilon: {sc.epsilon}",
        "",
    ]
    for o in outcomes:
        lines.append(f"[{o.index}] {o.title}")
        lines.append(f"    result: {o.primary}")
        for extra in o.lines:
            lines.append(f"    {extra}")
        lines.append("")
    good = sum(1 for o in outcomes if o.ok)
    lines.append(f"summary: {len(outcomes)} tasks, {good} ok, {len(outcomes) - good} failed")
    return "\n".join(lines) + "\n"


def _render_space(space: Space) -> str:
    if isinstance(space, PosetSpace):
        rels = sorted((a, b) for a, b in space.leq if a != b)
        rel_text = ", ".join(f"{a} < {b}" for a, b in rels) if rels else "discrete"
        return f"finite poset on {{{', '.join(space.points)}}} ({rel_text})"
    return f"interval [{space.lo}, {space.hi}]"
