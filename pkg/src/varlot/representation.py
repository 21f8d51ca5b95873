"""Constructive expected-utility pipeline.

Builds local representations by Dedekind-cut calibration, relates two
representations by positive linear transformations, glues locals into global
representations (or reports the obstruction), and carries out the classical
construction on spaces where every open has an open complement.

Every calibration returns a certificate: per-cell rational lower/upper bounds
with gap at most epsilon, the lower bound forcing ``mix < q`` and the upper
forcing ``q < mix`` wherever the bounds lie inside [0, 1] (bounds outside
[0, 1] belong to the cut by construction and carry no forcing obligation).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import sections as sec
from .lotteries import Lottery, PrizeSet, delta, glue_lotteries, lotteries_equal, mix, restrict_lottery
from .preference import (
    Family,
    Preference,
    PreferenceError,
    TabulatedPreference,
    UtilityPreference,
    check_continuity,
    check_independence,
    check_weak_order,
    expected_utility,
    forces,
    indifference_region,
    truth_value,
)
from .topology import (
    Atom,
    IntervalOpen,
    OpenSet,
    PosetOpen,
    PosetSpace,
    Space,
    components,
    covers,
    is_classical,
    is_subset,
    join,
    meet,
    minimal_open,
)

__all__ = [
    "RepresentationError",
    "CalibrationError",
    "CellCertificate",
    "CalibrationResult",
    "LocalRep",
    "RepFailure",
    "PLT",
    "TransformObstruction",
    "GlobalRep",
    "GlueRepObstruction",
    "DEFAULT_EPSILON",
    "check_monotonicity",
    "solve_calibration",
    "rep_expected_utility",
    "verify_representation",
    "local_representation",
    "uniqueness_transform",
    "glue_representations",
    "classical_representation",
    "constant_prize_representation",
]

DEFAULT_EPSILON = Fraction(1, 2**20)


class RepresentationError(ValueError):
    pass


class CalibrationError(RepresentationError):
    """A calibration precondition fails; the message names the truth value."""


# ---------------------------------------------------------------------------
# Lemma 1 harness


@dataclass(frozen=True)
class MonotonicityVerdict:
    passed: bool
    detail: str


def check_monotonicity(
    pref: Preference,
    p: Lottery,
    q: Lottery,
    a: sec.Section,
    b: sec.Section,
    on: OpenSet,
) -> MonotonicityVerdict:
    """With ``a < b`` on the region and ``p < q`` forced, the a-mixture of the
    better lottery must be forced below the b-mixture."""
    a = sec.restrict(a, on) if a.domain != on else a
    b = sec.restrict(b, on) if b.domain != on else b
    if sec.compare(a, b, on).lt != on:
        return MonotonicityVerdict(False, f"precondition failure: a < b does not hold on {on}")
    for name, s in (("a", a), ("b", b)):
        if sec.negative_witness(s) is not None:
            return MonotonicityVerdict(False, f"precondition failure: {name} below 0")
        if sec.negative_witness(sec.sub(sec.constant(on, Fraction(1)), s)) is not None:
            return MonotonicityVerdict(False, f"precondition failure: {name} above 1")
    p = restrict_lottery(p, on) if p.domain != on else p
    q = restrict_lottery(q, on) if q.domain != on else q
    if not forces(pref, "prec", p, q, on):
        return MonotonicityVerdict(
            False,
            f"precondition failure: [p < q] = {truth_value(pref, 'prec', p, q, on)} "
            f"does not cover {on}",
        )
    lower = mix(a, q, p)
    upper = mix(b, q, p)
    if forces(pref, "prec", lower, upper, on):
        return MonotonicityVerdict(True, "mixture order follows the weight order")
    return MonotonicityVerdict(
        False,
        f"[a-mix < b-mix] = {truth_value(pref, 'prec', lower, upper, on)} does not cover {on}",
    )


# ---------------------------------------------------------------------------
# Lemma 2: calibration by Dedekind cut


@dataclass(frozen=True)
class CellCertificate:
    """Per-cell instantiation of the rational cut at a sample stage.

    ``lower`` belongs to the lower cut at the sample (the weight-``lower``
    mixture is forced below the target on ``lower_domain``, an open
    neighborhood of the sample) and ``upper`` to the upper cut; bounds
    outside [0, 1] belong to the cut by construction and carry an empty
    domain.
    """

    cell: OpenSet
    sample: object
    lower: Fraction
    upper: Fraction
    lower_domain: OpenSet | None
    upper_domain: OpenSet | None

    @property
    def gap(self) -> Fraction:
        return self.upper - self.lower

    def render(self) -> str:
        low_dom = "vacuous" if self.lower_domain is None else f"forced on {self.lower_domain}"
        up_dom = "vacuous" if self.upper_domain is None else f"forced on {self.upper_domain}"
        return (
            f"{self.cell} at {self.sample}: lower {self.lower} ({low_dom}), "
            f"upper {self.upper} ({up_dom}), gap {self.gap}"
        )


@dataclass(frozen=True)
class CalibrationResult:
    weight: sec.Section
    exact: bool
    certificate: tuple[CellCertificate, ...]

    def max_gap(self) -> Fraction:
        return max((c.gap for c in self.certificate), default=Fraction(0))


def _require(pref: Preference, rel: str, p: Lottery, q: Lottery, on: OpenSet, label: str) -> None:
    if not forces(pref, rel, p, q, on):
        tv = truth_value(pref, rel, p, q, on)
        raise CalibrationError(f"precondition [{label}] holds only on {tv}, not all of {on}")


def _dyadic_floor(x: Fraction, scale: int) -> Fraction:
    return Fraction((x.numerator * scale) // x.denominator, scale)


def _mix_const(v: Fraction, p: Lottery, r: Lottery, cell: OpenSet) -> Lottery:
    w = sec.constant(cell, v)
    return mix(w, restrict_lottery(p, cell), restrict_lottery(r, cell))


def _below_domain(pref, v, p, q, r, cell) -> OpenSet | None:
    """Open subset of the cell where the weight-v mixture is forced below q."""
    if v < 0 or v > 1:
        return None
    m = _mix_const(v, p, r, cell)
    if isinstance(pref, TabulatedPreference) and pref.family.resolve(m) is None:
        return None
    tv = truth_value(pref, "prec", m, restrict_lottery(q, cell), cell)
    return None if tv.is_empty() else tv


def _above_domain(pref, v, p, q, r, cell) -> OpenSet | None:
    if v < 0 or v > 1:
        return None
    m = _mix_const(v, p, r, cell)
    if isinstance(pref, TabulatedPreference) and pref.family.resolve(m) is None:
        return None
    tv = truth_value(pref, "prec", restrict_lottery(q, cell), m, cell)
    return None if tv.is_empty() else tv


def _in_lower_cut(pref, v, p, q, r, cell, sample) -> bool:
    dom = _below_domain(pref, v, p, q, r, cell)
    return dom is not None and dom.contains_point(sample)


def _in_upper_cut(pref, v, p, q, r, cell, sample) -> bool:
    dom = _above_domain(pref, v, p, q, r, cell)
    return dom is not None and dom.contains_point(sample)


def _sample_of(cell: OpenSet):
    if isinstance(cell, PosetOpen):
        return next(p for p in cell.space.points if p in cell.points)
    return cell.atoms[0].sample()


def _certify_cell(pref, p, q, r, cell, epsilon) -> CellCertificate:
    """Bisect the pointwise rational cut at the cell's sample stage.

    Every mixture resolvable by the preference divides the rationals at the
    sample into the lower cut (mixture forced below the target on a
    neighborhood) and the upper cut; bisection stops at gap epsilon or at an
    exact indifference hit.
    """
    sample = _sample_of(cell)
    qc = restrict_lottery(q, cell)

    def finish(lo: Fraction, hi: Fraction) -> CellCertificate:
        return CellCertificate(
            cell,
            sample,
            lo,
            hi,
            _below_domain(pref, lo, p, q, r, cell),
            _above_domain(pref, hi, p, q, r, cell),
        )

    def cut_exactly_at(v: Fraction) -> CellCertificate | None:
        """A weight in neither cut pins the cut there; verify by probes.

        If the probe weights on both sides land in their cuts (bounds outside
        [0, 1] belong by construction), the cut is certified at ``v``; an
        exact indifference hit at the sample certifies it too.
        """
        if forces_sim_at(pref, qc, _mix_const(v, p, r, cell), cell, sample):
            return finish(v - epsilon / 4, v + epsilon / 4)
        low_probe = v - epsilon / 4
        high_probe = v + epsilon / 4
        low_ok = low_probe < 0 or _in_lower_cut(pref, low_probe, p, q, r, cell, sample)
        high_ok = high_probe > 1 or _in_upper_cut(pref, high_probe, p, q, r, cell, sample)
        if low_ok and high_ok:
            return finish(low_probe, high_probe)
        return None

    lo, hi = Fraction(0), Fraction(1)
    if not _in_lower_cut(pref, lo, p, q, r, cell, sample):
        got = cut_exactly_at(lo)
        if got is not None:
            return got
        raise CalibrationError(
            f"cut not locatable at 0 near {sample}: q and r are not comparable there"
        )
    if not _in_upper_cut(pref, hi, p, q, r, cell, sample):
        got = cut_exactly_at(hi)
        if got is not None:
            return got
        raise CalibrationError(
            f"cut not locatable at 1 near {sample}: q and p are not comparable there"
        )
    while hi - lo > epsilon:
        mid = (lo + hi) / 2
        if _in_lower_cut(pref, mid, p, q, r, cell, sample):
            lo = mid
        elif _in_upper_cut(pref, mid, p, q, r, cell, sample):
            hi = mid
        else:
            got = cut_exactly_at(mid)
            if got is not None:
                return got
            raise CalibrationError(
                f"cut not locatable near {sample}: the mixture at {mid} is not "
                "comparable with q there"
            )
    return finish(lo, hi)


def forces_sim_at(pref, q, m, cell, sample) -> bool:
    if isinstance(pref, TabulatedPreference) and pref.family.resolve(m) is None:
        return False
    return truth_value(pref, "sim", q, m, cell).contains_point(sample)


def _piece_at(s: sec.IntervalSection, cell: Atom) -> sec.Piece:
    sample = cell.sample()
    for piece in s.pieces:
        if piece.atom.lo <= sample <= piece.atom.hi and piece.atom.contains(sample):
            return piece
    raise CalibrationError(f"no piece covers {sample}")


def _ratio_endpoints(num: sec.IntervalSection, den: sec.IntervalSection, cell: Atom) -> tuple[Fraction, Fraction]:
    """Exact values of num/den at the cell endpoints, as formula limits.

    A vanishing denominator limit at an endpoint forces a shared numerator
    root (the ratio is bounded on the region), so the limit is the slope
    ratio there.
    """
    pn = _piece_at(num, cell)
    pd = _piece_at(den, cell)
    out = []
    for x in (cell.lo, cell.hi):
        d = pd.value_at(x)
        if d != 0:
            out.append(pn.value_at(x) / d)
        else:
            if pd.slope == 0 or pn.value_at(x) != 0:
                raise CalibrationError(
                    f"calibration denominator vanishes at {x} with non-vanishing numerator"
                )
            out.append(pn.slope / pd.slope)
    return out[0], out[1]


def _interval_cells(*sections: sec.IntervalSection) -> list[Atom]:
    """Breakpoint-refined relatively-open cells of the common domain."""
    cuts: set[Fraction] = set()
    atoms: list[Atom] = []
    for s in sections:
        for piece in s.pieces:
            cuts.add(piece.atom.lo)
            cuts.add(piece.atom.hi)
    for a in sections[0].domain.atoms:
        inner = sorted(c for c in cuts if a.lo <= c <= a.hi)
        pts = sorted(set([a.lo] + inner + [a.hi]))
        for lo, hi in zip(pts, pts[1:]):
            lo_closed = a.lo_closed if lo == a.lo else False
            hi_closed = a.hi_closed if hi == a.hi else False
            atoms.append(Atom(lo, hi, lo_closed, hi_closed))
    return atoms


def solve_calibration(
    pref: Preference,
    p: Lottery,
    q: Lottery,
    r: Lottery,
    on: OpenSet,
    epsilon: Fraction = DEFAULT_EPSILON,
) -> CalibrationResult:
    """The continuous weight with ``q ~ weight*p + (1-weight)*r`` on the region.

    Preconditions: ``r`` at most ``q``, ``q`` at most ``p``, and ``r``
    strictly below ``p``, all forced on the region.  For utility-induced
    preferences the closed form (EU(q)-EU(r))/(EU(p)-EU(r)) is returned when
    it is piecewise-linear, and the bisection certificate must sandwich it;
    otherwise the returned weight interpolates exact pointwise values on a
    grid refined until every cell's certified gap is at most epsilon.
    """
    p = restrict_lottery(p, on) if p.domain != on else p
    q = restrict_lottery(q, on) if q.domain != on else q
    r = restrict_lottery(r, on) if r.domain != on else r
    _require(pref, "preceq", r, q, on, "r <= q")
    _require(pref, "preceq", q, p, on, "q <= p")
    _require(pref, "prec", r, p, on, "r < p")

    closed_form: sec.Section | None = None
    if isinstance(pref, UtilityPreference):
        eu_p = expected_utility(pref, p, on)
        eu_q = expected_utility(pref, q, on)
        eu_r = expected_utility(pref, r, on)
        closed_form = sec.divide(sec.sub(eu_q, eu_r), sec.sub(eu_p, eu_r))

    certificates: list[CellCertificate] = []
    if isinstance(on, PosetOpen):
        for comp in components(on):
            certificates.append(_certify_cell(pref, p, q, r, comp, epsilon))
        if closed_form is not None:
            weight = closed_form
            exact = True
        else:
            values: dict[str, Fraction] = {}
            for cert, comp in zip(certificates, components(on)):
                mid = (cert.lower + cert.upper) / 2
                for pt in comp.points:
                    values[pt] = mid
            weight = sec.from_point_values(on, values)
            exact = False
        _check_sandwich(certificates, weight)
        return CalibrationResult(weight, exact, tuple(certificates))

    if not isinstance(pref, UtilityPreference):
        raise CalibrationError(
            "interval-space calibration needs a utility-induced preference "
            "(tables cannot rank off-family mixtures)"
        )
    num = sec.sub(eu_q, eu_r)
    den = sec.sub(eu_p, eu_r)
    cells = _interval_cells(eu_p, eu_q, eu_r)
    knots: list[tuple[Fraction, Fraction]] = []
    for cell in cells:
        cell_open = IntervalOpen(on.space, (cell,))
        certificates.append(_certify_cell(pref, p, q, r, cell_open, epsilon))
        v_lo, v_hi = _ratio_endpoints(num, den, cell)
        if not knots or knots[-1][0] != cell.lo:
            knots.append((cell.lo, v_lo))
        knots.append((cell.hi, v_hi))
    if closed_form is not None:
        weight = closed_form
        exact = True
    else:
        weight = _knots_to_section(on, knots)
        exact = False
    _check_sandwich(certificates, weight)
    return CalibrationResult(weight, exact, tuple(certificates))


def _knots_to_section(on: IntervalOpen, knots: list[tuple[Fraction, Fraction]]) -> sec.IntervalSection:
    pieces: list[sec.Piece] = []
    dedup: list[tuple[Fraction, Fraction]] = []
    for x, v in knots:
        if dedup and dedup[-1][0] == x:
            continue
        dedup.append((x, v))
    for (x1, v1), (x2, v2) in zip(dedup, dedup[1:]):
        slope = (v2 - v1) / (x2 - x1)
        seg = Atom(x1, x2, True, True)
        for a in on.atoms:
            from .topology import atoms_intersection

            for clipped in atoms_intersection((seg,), (a,)):
                pieces.append(sec.Piece(clipped, slope, v1 - slope * x1))
    return sec.IntervalSection(on, tuple(pieces))


def _check_sandwich(certificates: Sequence[CellCertificate], weight: sec.Section) -> None:
    for cert in certificates:
        value = weight.value_at(cert.sample)
        if not cert.lower <= value <= cert.upper:
            raise CalibrationError(
                f"certificate at {cert.sample} does not sandwich the calibration "
                f"weight: {cert.lower} <= {value} <= {cert.upper} fails"
            )


# ---------------------------------------------------------------------------
# Local representation (Lemmas 4 and 5)


@dataclass(frozen=True)
class CalibRecord:
    component: OpenSet
    kind: str  # "strict" | "indifferent"
    zero: str | None = None
    unit: str | None = None

    def render(self) -> str:
        if self.kind == "indifferent":
            return f"{self.component}: all-indifferent (constant utility)"
        return f"{self.component}: zero {self.zero}, unit {self.unit}"


@dataclass(frozen=True)
class LocalRep:
    domain: OpenSet
    prizes: PrizeSet
    weights: tuple[tuple[str, sec.Section], ...]
    calibrations: tuple[CalibRecord, ...]
    notes: tuple[str, ...] = ()

    def weight(self, name: str) -> sec.Section:
        for n, s in self.weights:
            if n == name:
                return s
        raise RepresentationError(f"no weight for prize {name}")


@dataclass(frozen=True)
class RepFailure:
    domain: OpenSet
    reason: str

    def __str__(self) -> str:
        return f"no representation on {self.domain}: {self.reason}"


def rep_expected_utility(rep: LocalRep | "GlobalRep", lot: Lottery, on: OpenSet) -> sec.Section:
    total: sec.Section | None = None
    for name, w in rep.weights:
        if name not in lot.support:
            continue
        term = sec.mul(sec.restrict(w, on), sec.restrict(lot.coord(name), on))
        total = term if total is None else sec.add(total, term)
    if total is None:
        raise RepresentationError("lottery has empty support")
    return total


def verify_representation(
    rep: LocalRep | "GlobalRep", pref: Preference, family: Family, on: OpenSet
) -> list[str]:
    """Check the order and indifference identities pairwise on the family.

    Returns human-readable failures (empty means every checkable pair agrees);
    pairs whose expected utility is not exactly computable are reported as
    skipped notes prefixed with 'note:'.
    """
    problems: list[str] = []
    names = family.names()
    for i, a in enumerate(names):
        for b in names:
            if a == b:
                continue
            p = restrict_lottery(family.get(a), on)
            q = restrict_lottery(family.get(b), on)
            try:
                cmpres = sec.compare(
                    rep_expected_utility(rep, p, on), rep_expected_utility(rep, q, on), on
                )
            except sec.ExactnessError:
                problems.append(f"note: pair ({a}, {b}) not exactly checkable")
                continue
            tv_lt = truth_value(pref, "prec", p, q, on)
            if tv_lt != cmpres.lt:
                problems.append(
                    f"order identity fails for ({a}, {b}): preference {tv_lt}, utility {cmpres.lt}"
                )
            if b > a:
                tv_eq = truth_value(pref, "sim", p, q, on)
                if tv_eq != cmpres.eq:
                    problems.append(
                        f"indifference identity fails for ({a}, {b}): preference {tv_eq}, "
                        f"utility {cmpres.eq}"
                    )
    return problems


_CHART_DEPTH = 8
_CHART_BUDGET = 32


def _position_prize(
    pref: Preference,
    dz: Lottery,
    p: Lottery,
    q: Lottery,
    comp: OpenSet,
    epsilon: Fraction,
):
    """Utility of one prize lottery relative to zero ``p`` and unit ``q``."""
    one = sec.constant(comp, Fraction(1))
    dzc = restrict_lottery(dz, comp)
    pc = restrict_lottery(p, comp)
    qc = restrict_lottery(q, comp)
    if forces(pref, "preceq", pc, dzc, comp) and forces(pref, "preceq", dzc, qc, comp):
        res = solve_calibration(pref, qc, dzc, pc, comp, epsilon)
        return res.weight
    if forces(pref, "prec", dzc, pc, comp):
        # p sits inside [dz, q]: value -a/(1-a) for the calibration weight a.
        res = solve_calibration(pref, qc, pc, dzc, comp, epsilon)
        a = res.weight
        denom = sec.sub(one, a)
        out = sec.divide(sec.scale(a, Fraction(-1)), denom)
        if out is None:
            raise CalibrationError("prize value -a/(1-a) is not piecewise-linear")
        return out
    if forces(pref, "prec", qc, dzc, comp):
        # q sits inside [p, dz]: value 1/b.
        res = solve_calibration(pref, dzc, qc, pc, comp, epsilon)
        b = res.weight
        out = sec.divide(one, b)
        if out is None:
            raise CalibrationError("prize value 1/b is not piecewise-linear")
        return out
    return _position_via_charts(pref, dzc, pc, qc, comp, epsilon)


def _dyadic_scan_up():
    # 1/2, 3/4, 7/8, ... approaching 1.
    return [Fraction(2**d - 1, 2**d) for d in range(1, _CHART_DEPTH + 1)]


def _dyadic_scan_down():
    # 1/2, 1/4, 1/8, ... approaching 0.
    return [Fraction(1, 2**d) for d in range(1, _CHART_DEPTH + 1)]


def _split_piece(piece: IntervalOpen) -> list[IntervalOpen]:
    atom = piece.atoms[0]
    third = (atom.hi - atom.lo) / 3
    return [
        IntervalOpen(piece.space, (Atom(atom.lo, atom.hi - third, atom.lo_closed, False),)),
        IntervalOpen(piece.space, (Atom(atom.lo + third, atom.hi, False, atom.hi_closed),)),
    ]


def _position_via_charts(pref, dz, p, q, comp, epsilon):
    """Two-chart valuation when the prize is not globally positioned.

    Negative transitivity splits the component into a region where the prize
    is below the unit and one where it is above the zero; each piece is
    valued in its own chart through an auxiliary calibration lottery, then
    re-scaled to the shared zero/unit and glued.
    """
    u1 = truth_value(pref, "prec", dz, q, comp)
    u2 = truth_value(pref, "prec", p, dz, comp)
    if join(u1, u2) != comp:
        raise CalibrationError(
            f"negative-transitivity split {u1} ∪ {u2} does not cover {comp}"
        )
    one = sec.constant(comp, Fraction(1))
    pieces: list[sec.Section] = []
    budget = _CHART_BUDGET
    queue: list[tuple[str, OpenSet]] = [("below-unit", c) for c in components(u1)]
    queue += [("above-zero", c) for c in components(u2)]
    while queue:
        budget -= 1
        if budget < 0:
            raise CalibrationError("chart budget exhausted while splitting the cover")
        mode, piece = queue.pop(0)
        dzp = restrict_lottery(dz, piece)
        pp = restrict_lottery(p, piece)
        qp = restrict_lottery(q, piece)
        onep = sec.constant(piece, Fraction(1))
        if mode == "below-unit":
            found = None
            for t in _dyadic_scan_up():
                bridge = mix(sec.constant(piece, t), qp, dzp)
                if forces(pref, "prec", pp, bridge, piece) and forces(
                    pref, "prec", bridge, qp, piece
                ):
                    found = (t, bridge)
                    break
            if found is None:
                if isinstance(piece, IntervalOpen) and piece.atoms[0].hi - piece.atoms[0].lo > epsilon:
                    queue.extend(("below-unit", s) for s in _split_piece(piece))
                    continue
                raise CalibrationError(f"no bridge lottery found on {piece}")
            t, bridge = found
            gamma = solve_calibration(pref, qp, bridge, pp, piece, epsilon).weight
            delta_w = solve_calibration(pref, qp, bridge, dzp, piece, epsilon).weight
            num = sec.sub(gamma, delta_w)
            den = sec.sub(onep, delta_w)
            val = sec.divide(num, den)
            if val is None:
                raise CalibrationError("chart value (gamma-delta)/(1-delta) is not piecewise-linear")
            pieces.append(val)
        else:
            found = None
            for t in _dyadic_scan_down():
                bridge = mix(sec.constant(piece, t), dzp, pp)
                if forces(pref, "prec", bridge, qp, piece) and forces(
                    pref, "prec", pp, bridge, piece
                ):
                    found = (t, bridge)
                    break
            if found is None:
                if isinstance(piece, IntervalOpen) and piece.atoms[0].hi - piece.atoms[0].lo > epsilon:
                    queue.extend(("above-zero", s) for s in _split_piece(piece))
                    continue
                raise CalibrationError(f"no bridge lottery found on {piece}")
            t, bridge = found
            gamma = solve_calibration(pref, qp, bridge, pp, piece, epsilon).weight
            val = sec.scale(gamma, Fraction(1, t))
            pieces.append(val)
    glued = sec.glue(pieces)
    if isinstance(glued, sec.GlueObstruction):
        raise CalibrationError(f"chart values disagree: {glued}")
    if glued.domain != comp:
        glued = sec.restrict(glued, comp) if is_subset(comp, glued.domain) else glued
    return glued


def local_representation(
    pref: Preference,
    on: OpenSet,
    family: Family,
    calib: tuple[str, str] | None = None,
    epsilon: Fraction = DEFAULT_EPSILON,
    prizes: PrizeSet | None = None,
):
    """Build prize-weight sections representing the preference on a region.

    Each connected component is calibrated separately: an all-indifferent
    component gets constant weights; otherwise the given (or first forced)
    strict family pair serves as zero and unit and every prize is positioned
    by calibration, with the two-chart construction for prizes that change
    position.  Returns the representation or a constructive failure report.
    """
    if prizes is None:
        if isinstance(pref, UtilityPreference):
            prizes = pref.prizes
        else:
            prizes = family.members[0][1].prizes
    names = family.names()
    records: list[CalibRecord] = []
    notes: list[str] = []
    per_comp_weights: dict[str, list[sec.Section]] = {z: [] for z in prizes.names}
    for comp in components(on):
        if indifference_region(pref, family, comp) == comp:
            records.append(CalibRecord(comp, "indifferent"))
            for z in prizes.names:
                per_comp_weights[z].append(sec.constant(comp, Fraction(0)))
            continue
        pair: tuple[str, str] | None = None
        if calib is not None and forces(
            pref,
            "prec",
            restrict_lottery(family.get(calib[0]), comp),
            restrict_lottery(family.get(calib[1]), comp),
            comp,
        ):
            pair = calib
        else:
            for a in names:
                for b in names:
                    if a != b and forces(
                        pref,
                        "prec",
                        restrict_lottery(family.get(a), comp),
                        restrict_lottery(family.get(b), comp),
                        comp,
                    ):
                        pair = (a, b)
                        break
                if pair:
                    break
        if pair is None:
            return RepFailure(
                on,
                f"component {comp} is neither all-indifferent nor strictly ranked "
                "by any family pair (no open separates its points further)",
            )
        records.append(CalibRecord(comp, "strict", pair[0], pair[1]))
        p = family.get(pair[0])
        q = family.get(pair[1])
        for z in prizes.names:
            dz = delta(prizes, on, z)
            try:
                per_comp_weights[z].append(_position_prize(pref, dz, p, q, comp, epsilon))
            except (CalibrationError, PreferenceError) as exc:
                return RepFailure(on, f"prize {z} on {comp}: {exc}")
    weights: list[tuple[str, sec.Section]] = []
    for z in prizes.names:
        glued = sec.glue(per_comp_weights[z])
        if isinstance(glued, sec.GlueObstruction):
            return RepFailure(on, f"weight sections for {z} do not glue: {glued}")
        weights.append((z, glued))
    rep = LocalRep(on, prizes, tuple(weights), tuple(records), tuple(notes))
    problems = [m for m in verify_representation(rep, pref, family, on) if not m.startswith("note:")]
    if problems:
        return RepFailure(on, "; ".join(problems))
    return rep


# ---------------------------------------------------------------------------
# Lemma 6: uniqueness up to positive linear transformations


@dataclass(frozen=True)
class PLT:
    scale: sec.Section
    shift: sec.Section

    def apply(self, s: sec.Section) -> sec.Section:
        return sec.add(sec.mul(self.scale, s), self.shift)


@dataclass(frozen=True)
class TransformObstruction:
    point: object
    detail: str
    partials: tuple[tuple[OpenSet, Fraction | None, str], ...] = ()

    def __str__(self) -> str:
        return f"no continuous positive linear transformation at {self.point}: {self.detail}"


def _cell_transform(repA: LocalRep, repB: LocalRep, cell: OpenSet):
    """Solve weightsB = a*weightsA + b on one cell; returns (a, b) sections."""
    names = repA.prizes.names
    a_sec = b_sec = None
    for i, zi in enumerate(names):
        for zj in names[i + 1 :]:
            da = sec.sub(
                sec.restrict(repA.weight(zi), cell), sec.restrict(repA.weight(zj), cell)
            )
            if sec.not_equal_witness(da, Fraction(0)) is None:
                continue
            db = sec.sub(
                sec.restrict(repB.weight(zi), cell), sec.restrict(repB.weight(zj), cell)
            )
            a_sec = sec.divide(db, da)
            if a_sec is None:
                return None, f"scale section on {cell} is not piecewise-linear"
            b_sec = sec.sub(
                sec.restrict(repB.weight(zi), cell), sec.mul(a_sec, sec.restrict(repA.weight(zi), cell))
            )
            break
        if a_sec is not None:
            break
    if a_sec is None:
        # All A-weights coincide on the cell: B must coincide too; scale free.
        base = sec.restrict(repB.weight(names[0]), cell)
        for z in names[1:]:
            if sec.not_equal_witness(sec.sub(sec.restrict(repB.weight(z), cell), base), Fraction(0)) is not None:
                return None, f"first representation is degenerate on {cell} but second is not"
        a_sec = sec.constant(cell, Fraction(1))
        b_sec = sec.sub(base, sec.restrict(repA.weight(names[0]), cell))
    for z in names:
        lhs = sec.restrict(repB.weight(z), cell)
        try:
            rhs = sec.add(sec.mul(a_sec, sec.restrict(repA.weight(z), cell)), b_sec)
        except sec.ExactnessError:
            return None, f"transform check for {z} on {cell} is not piecewise-linear"
        w = sec.not_equal_witness(sec.sub(lhs, rhs), Fraction(0))
        if w is not None:
            return None, (
                f"prize {z} breaks the transform at {w}: "
                f"{lhs.value_at(w)} != {rhs.value_at(w)}"
            )
    if sec.compare(sec.constant(cell, Fraction(0)), a_sec, cell).lt != cell:
        return None, f"scale is not strictly positive on {cell}"
    return (a_sec, b_sec), None


def uniqueness_transform(repA: LocalRep, repB: LocalRep, on: OpenSet):
    """Sections a > 0 and b with weightsB = a*weightsA + b, or the obstruction.

    Cells are split at every point where all first-representation weight
    differences vanish; a junction whose one-sided scales disagree admits no
    continuous extension and is reported with both side values.
    """
    if repA.prizes != repB.prizes:
        raise RepresentationError("representations cover different prize sets")
    if isinstance(on, PosetOpen):
        scales: list[sec.Section] = []
        shifts: list[sec.Section] = []
        for comp in components(on):
            got, err = _cell_transform(repA, repB, comp)
            if err is not None:
                return TransformObstruction(comp, err)
            scales.append(got[0])
            shifts.append(got[1])
        a = sec.glue(scales)
        b = sec.glue(shifts)
        assert not isinstance(a, sec.GlueObstruction) and not isinstance(b, sec.GlueObstruction)
        return PLT(a, b)
    names = repA.prizes.names
    partials: list[tuple[OpenSet, Fraction | None, str]] = []
    out_a: list[sec.Section] = []
    out_b: list[sec.Section] = []
    for comp in components(on):
        atom = comp.atoms[0]
        cuts: set[Fraction] = {atom.lo, atom.hi}
        roots: set[Fraction] = set()
        for i, zi in enumerate(names):
            for zj in names[i + 1 :]:
                d = sec.sub(
                    sec.restrict(repA.weight(zi), comp), sec.restrict(repA.weight(zj), comp)
                )
                for piece in d.pieces:
                    cuts.add(piece.atom.lo)
                    cuts.add(piece.atom.hi)
                    if piece.slope != 0:
                        root = -piece.intercept / piece.slope
                        if piece.atom.lo <= root <= piece.atom.hi:
                            cuts.add(root)
                            roots.add(root)
        ordered = sorted(c for c in cuts if atom.lo <= c <= atom.hi)
        cell_results: list[tuple[Atom, sec.Section, sec.Section]] = []
        for lo, hi in zip(ordered, ordered[1:]):
            lo_closed = atom.lo_closed and lo == atom.lo and lo not in roots
            hi_closed = atom.hi_closed and hi == atom.hi and hi not in roots
            cell = IntervalOpen(on.space, (Atom(lo, hi, lo_closed, hi_closed),))
            got, err = _cell_transform(repA, repB, cell)
            if err is not None:
                return TransformObstruction(cell, err)
            cell_results.append((Atom(lo, hi, lo_closed, hi_closed), got[0], got[1]))
        # Continuity across interior junctions; the junction value of the
        # scale is the one-sided formula limit.
        for (left_atom, a_left, b_left), (right_atom, a_right, b_right) in zip(
            cell_results, cell_results[1:]
        ):
            x = left_atom.hi
            la = a_left.pieces[-1].value_at(x)
            ra = a_right.pieces[0].value_at(x)
            lb = b_left.pieces[-1].value_at(x)
            rb = b_right.pieces[0].value_at(x)
            if la != ra or lb != rb:
                for cell_atom, a_s, b_s in cell_results:
                    scale_const = (
                        a_s.pieces[0].intercept
                        if all(p.slope == 0 for p in a_s.pieces)
                        else None
                    )
                    partials.append(
                        (
                            IntervalOpen(on.space, (cell_atom,)),
                            scale_const,
                            f"a = {_render_section_formula(a_s)}, b = {_render_section_formula(b_s)}",
                        )
                    )
                return TransformObstruction(
                    x,
                    f"scale jumps from {la} to {ra}"
                    if la != ra
                    else f"shift jumps from {lb} to {rb}",
                    tuple(partials),
                )
        # Degenerate roots at the component boundary: the adjacent cell's
        # limiting transform must satisfy the point constraint.
        for pt, (cell_atom, a_s, b_s), pick in (
            (atom.lo, cell_results[0], 0),
            (atom.hi, cell_results[-1], -1),
        ):
            if pt not in roots or not comp.contains_point(pt):
                continue
            a_lim = a_s.pieces[pick].value_at(pt)
            b_lim = b_s.pieces[pick].value_at(pt)
            for z in names:
                lhs = repB.weight(z).value_at(pt)
                rhs = a_lim * repA.weight(z).value_at(pt) + b_lim
                if lhs != rhs:
                    return TransformObstruction(
                        pt,
                        f"limiting transform (a={a_lim}, b={b_lim}) fails for {z} "
                        f"at the degenerate point: {lhs} != {rhs}",
                    )
        # Junctions agree: hand each interior junction (and verified boundary
        # root) to a neighboring cell so the pieces cover the component.
        pieces_a: list[sec.Piece] = []
        pieces_b: list[sec.Piece] = []
        for idx, (_, a_s, b_s) in enumerate(cell_results):
            first_cell = idx == 0
            last_cell = idx == len(cell_results) - 1
            for src, dst in ((a_s, pieces_a), (b_s, pieces_b)):
                for j, pc in enumerate(src.pieces):
                    atom_out = pc.atom
                    if not atom_out.lo_closed and atom_out.lo == atom.lo and atom.lo_closed and first_cell and j == 0:
                        atom_out = Atom(atom_out.lo, atom_out.hi, True, atom_out.hi_closed)
                    if not atom_out.lo_closed and atom_out.lo != atom.lo and j == 0 and not first_cell:
                        atom_out = Atom(atom_out.lo, atom_out.hi, True, atom_out.hi_closed)
                    if (
                        not atom_out.hi_closed
                        and atom_out.hi == atom.hi
                        and atom.hi_closed
                        and last_cell
                        and j == len(src.pieces) - 1
                    ):
                        atom_out = Atom(atom_out.lo, atom_out.hi, atom_out.lo_closed, True)
                    dst.append(sec.Piece(atom_out, pc.slope, pc.intercept))
        out_a.append(sec.IntervalSection(comp, tuple(pieces_a)))
        out_b.append(sec.IntervalSection(comp, tuple(pieces_b)))
    a = sec.glue(out_a)
    b = sec.glue(out_b)
    assert not isinstance(a, sec.GlueObstruction) and not isinstance(b, sec.GlueObstruction)
    return PLT(a, b)


def _render_section_formula(s: sec.Section) -> str:
    if isinstance(s, sec.PosetSection):
        return ", ".join(f"{p}:{v}" for p, v in s.values)
    parts = []
    for piece in s.pieces:
        if piece.slope == 0:
            parts.append(f"{piece.intercept} on {piece.atom}")
        else:
            parts.append(f"{piece.slope}x+{piece.intercept} on {piece.atom}")
    return "; ".join(parts)


# ---------------------------------------------------------------------------
# Corollary 1: gluing local representations


@dataclass(frozen=True)
class GlobalRep:
    domain: OpenSet
    prizes: PrizeSet
    weights: tuple[tuple[str, sec.Section], ...]
    cover: tuple[OpenSet, ...]
    locals: tuple[LocalRep, ...]
    notes: tuple[str, ...] = ()

    def weight(self, name: str) -> sec.Section:
        for n, s in self.weights:
            if n == name:
                return s
        raise RepresentationError(f"no weight for prize {name}")


@dataclass(frozen=True)
class GlueRepObstruction:
    element: OpenSet | None
    reason: str

    def __str__(self) -> str:
        where = f"on cover element {self.element}: " if self.element is not None else ""
        return f"gluing obstruction {where}{self.reason}"


def glue_representations(
    pref: Preference,
    family: Family,
    cover: Sequence[OpenSet],
    target: OpenSet,
    calib: tuple[str, str] | None = None,
    epsilon: Fraction = DEFAULT_EPSILON,
):
    """Build a local representation per cover element and collate them.

    Later charts are aligned to the first by the uniqueness transform on the
    overlap (constant transforms extend to the whole chart); disagreeing
    overlaps or unrepresentable elements are obstructions, not errors.
    """
    if not covers(cover, target):
        raise RepresentationError("cover does not union to the target open")
    locals_: list[LocalRep] = []
    for element in cover:
        built = local_representation(pref, element, family, calib, epsilon)
        if isinstance(built, RepFailure):
            return GlueRepObstruction(element, built.reason)
        locals_.append(built)
    glued_weights: dict[str, sec.Section] = {
        z: s for z, s in locals_[0].weights
    }
    glued_domain = locals_[0].domain
    prizes = locals_[0].prizes
    notes: list[str] = []
    for nxt in locals_[1:]:
        overlap = meet(glued_domain, nxt.domain)
        aligned = nxt
        if not overlap.is_empty():
            partial_glued = LocalRep(
                overlap,
                prizes,
                tuple((z, sec.restrict(glued_weights[z], overlap)) for z in prizes.names),
                (),
            )
            partial_next = LocalRep(
                overlap,
                prizes,
                tuple((z, sec.restrict(nxt.weight(z), overlap)) for z in prizes.names),
                (),
            )
            t = uniqueness_transform(partial_next, partial_glued, overlap)
            if isinstance(t, TransformObstruction):
                return GlueRepObstruction(nxt.domain, str(t))
            if not (sec.is_locally_constant(t.scale) and sec.is_locally_constant(t.shift)):
                return GlueRepObstruction(
                    nxt.domain,
                    "alignment transform is not locally constant on the overlap and "
                    "cannot be extended to the whole chart",
                )
            scale_vals = _locally_constant_value(t.scale)
            shift_vals = _locally_constant_value(t.shift)
            if scale_vals is None or shift_vals is None:
                return GlueRepObstruction(
                    nxt.domain,
                    "alignment transform varies across overlap components; no canonical extension",
                )
            notes.append(
                f"aligned chart on {nxt.domain} by scale {scale_vals}, shift {shift_vals}"
            )
            aligned = LocalRep(
                nxt.domain,
                prizes,
                tuple(
                    (
                        z,
                        sec.add(
                            sec.scale(nxt.weight(z), scale_vals),
                            sec.constant(nxt.domain, shift_vals),
                        ),
                    )
                    for z in prizes.names
                ),
                nxt.calibrations,
            )
        for z in prizes.names:
            glued = sec.glue([glued_weights[z], aligned.weight(z)])
            if isinstance(glued, sec.GlueObstruction):
                return GlueRepObstruction(nxt.domain, f"weight for {z}: {glued}")
            glued_weights[z] = glued
        glued_domain = join(glued_domain, nxt.domain)
    rep = GlobalRep(
        target,
        prizes,
        tuple((z, glued_weights[z]) for z in prizes.names),
        tuple(cover),
        tuple(locals_),
        tuple(notes),
    )
    problems = [m for m in verify_representation(rep, pref, family, target) if not m.startswith("note:")]
    if problems:
        return GlueRepObstruction(None, "; ".join(problems))
    return rep


def _locally_constant_value(s: sec.Section) -> Fraction | None:
    if isinstance(s, sec.PosetSection):
        vals = {v for _, v in s.values}
    else:
        vals = {p.intercept for p in s.pieces}
    return next(iter(vals)) if len(vals) == 1 else None


# ---------------------------------------------------------------------------
# Theorem 2: the classical construction


@dataclass(frozen=True)
class ClassicalRejection:
    reason: str
    witness: OpenSet | None = None

    def __str__(self) -> str:
        if self.witness is not None:
            return f"{self.reason} (witness {self.witness})"
        return self.reason


@dataclass(frozen=True)
class ClassicalResult:
    rep: GlobalRep
    indifferent_region: OpenSet
    strict_region: OpenSet
    indicator_checks: tuple[str, ...]
    better_mosaic: Lottery
    worse_mosaic: Lottery
    axiom_notes: tuple[str, ...]


def classical_representation(
    pref: Preference,
    family: Family,
    space: Space,
    mixers: Sequence[tuple[str, sec.Section]] = (),
    epsilon: Fraction = DEFAULT_EPSILON,
):
    """Theorem-2 construction on a classical space.

    Partitions the carrier into the all-indifferent region and its (open)
    complement, assembles mosaic lotteries pointwise from forced pairs,
    verifies the mosaics are strictly ranked on the strict region, and glues
    the component representations into a global one.  Non-classical spaces
    are rejected with the witnessing open.
    """
    verdict = is_classical(space)
    if not verdict.classical:
        return ClassicalRejection("space is not classical", verdict.witness)
    if not isinstance(space, PosetSpace):
        return ClassicalRejection("classical construction implemented for finite spaces")
    full = space.full()
    wo = check_weak_order(pref, family, full)
    if not wo.passed:
        return ClassicalRejection("weak order fails: " + wo.findings[0].detail)
    if not mixers:
        mixers = (("half", sec.constant(full, Fraction(1, 2))), ("one", sec.constant(full, Fraction(1))))
    ind = check_independence(pref, family, mixers, full)
    if not ind.passed:
        return ClassicalRejection("independence fails: " + ind.findings[0].detail)
    cont = check_continuity(pref, family, full, epsilon)
    if not cont.passed:
        return ClassicalRejection("continuity fails: " + cont.findings[0].detail)

    w1 = indifference_region(pref, family, full)
    w2_points = frozenset(space.points) - w1.points
    w2 = PosetOpen(space, w2_points)  # open: complements are open here
    prizes = family.members[0][1].prizes
    first_prize = prizes.names[0]
    names = family.names()

    indicator_checks: list[str] = []
    better_parts: list[Lottery] = []
    worse_parts: list[Lottery] = []
    piece_index = 0
    for x in space.points:
        up = minimal_open(space, x)
        if x in w1.points:
            better_parts.append(restrict_lottery(delta(prizes, full, first_prize), up))
            worse_parts.append(restrict_lottery(delta(prizes, full, first_prize), up))
            continue
        pair = None
        for a in names:
            for b in names:
                if a != b and forces(
                    pref,
                    "prec",
                    restrict_lottery(family.get(a), up),
                    restrict_lottery(family.get(b), up),
                    up,
                ):
                    pair = (a, b)
                    break
            if pair:
                break
        if pair is None:
            return ClassicalRejection(
                f"no strict family pair at point {x} although it is not all-indifferent"
            )
        piece_index += 1
        indicator = sec.from_point_values(
            full, {pt: Fraction(1) if pt in up.points else Fraction(0) for pt in space.points}
        )
        indicator_checks.append(
            f"indicator of piece {piece_index} ({up}) is a continuous section (clopen)"
        )
        better_parts.append(restrict_lottery(family.get(pair[1]), up))
        worse_parts.append(restrict_lottery(family.get(pair[0]), up))
    better = glue_lotteries(better_parts)
    worse = glue_lotteries(worse_parts)
    if isinstance(better, sec.GlueObstruction) or isinstance(worse, sec.GlueObstruction):
        return ClassicalRejection("mosaic lotteries fail to glue")
    if not w2.is_empty() and not forces(
        pref,
        "prec",
        restrict_lottery(worse, w2),
        restrict_lottery(better, w2),
        w2,
    ):
        return ClassicalRejection("mosaic pair is not strictly ranked on the strict region")

    mosaic_family = Family(family.members + (("_worse", worse), ("_better", better)))
    cover = tuple(minimal_open(space, x) for x in space.points)
    built = glue_representations(
        pref if not isinstance(pref, TabulatedPreference) else _extend_table(pref, mosaic_family),
        mosaic_family,
        cover,
        full,
        ("_worse", "_better"),
        epsilon,
    )
    if isinstance(built, GlueRepObstruction):
        return ClassicalRejection(str(built))
    necessity = []
    induced = UtilityPreference(prizes, built.weights)
    wo2 = check_weak_order(induced, family, full)
    ind2 = check_independence(induced, family, mixers, full)
    necessity.append(
        "induced utility preference satisfies weak order: "
        + ("yes" if wo2.passed else "NO")
    )
    necessity.append(
        "induced utility preference satisfies independence: "
        + ("yes" if ind2.passed else "NO")
    )
    return ClassicalResult(
        built, w1, w2, tuple(indicator_checks), better, worse, tuple(necessity)
    )


def _extend_table(pref: TabulatedPreference, fam: Family) -> TabulatedPreference:
    """Re-key a tabulated preference on an enlarged family.

    Mosaic lotteries restrict to family members pointwise, so the recorded
    pairs stay valid; resolution handles the new names.
    """
    return TabulatedPreference(pref.space, fam, pref.table)


# ---------------------------------------------------------------------------
# Corollary 2: constant prize weights


def constant_prize_representation(
    pref: Preference,
    family: Family,
    space: Space,
    worst: str,
    best: str,
    epsilon: Fraction = DEFAULT_EPSILON,
):
    """Weights pinned to worst = 0 and best = 1; every other prize's weight is
    the constant calibration value.  Requires global comparison of constant
    lotteries (checked first) and a globally ranked worst/best delta pair."""
    from .preference import check_assumption7

    full = space.full()
    a7 = check_assumption7(pref, family, space)
    if not a7.passed:
        return ClassicalRejection("constant-comparison axiom fails: " + a7.findings[0].detail)
    prizes = family.members[0][1].prizes
    d_worst = family.get(worst)
    d_best = family.get(best)
    if not forces(pref, "prec", d_worst, d_best, full):
        return ClassicalRejection(f"{worst} < {best} is not forced on the carrier")
    weights: list[tuple[str, sec.Section]] = []
    cal_records: list[str] = []
    for z in prizes.names:
        dz = delta(prizes, full, z)
        zname = family.resolve(dz)
        if zname == worst:
            weights.append((z, sec.constant(full, Fraction(0))))
            continue
        if zname == best:
            weights.append((z, sec.constant(full, Fraction(1))))
            continue
        if not (
            forces(pref, "preceq", d_worst, dz, full)
            and forces(pref, "preceq", dz, d_best, full)
        ):
            return ClassicalRejection(
                f"delta lottery for {z} is not between {worst} and {best} on the carrier"
            )
        res = solve_calibration(pref, d_best, dz, d_worst, full, epsilon)
        beta = _locally_constant_value(res.weight) if sec.is_locally_constant(res.weight) else None
        if beta is None:
            return ClassicalRejection(
                f"calibration weight for {z} is not constant; constant-prize "
                "representation impossible"
            )
        cal_records.append(f"u({z}) = {beta}")
        weights.append((z, sec.constant(full, beta)))
    rep = GlobalRep(full, prizes, tuple(weights), (full,), (), tuple(cal_records))
    problems = [
        m for m in verify_representation(rep, pref, family, full) if not m.startswith("note:")
    ]
    if problems:
        return ClassicalRejection("; ".join(problems))
    return rep
