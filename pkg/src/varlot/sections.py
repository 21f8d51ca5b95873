"""Continuous sections over the two space models.

On a finite Alexandrov space a continuous real-valued function is constant on
each connected component, so a section is a point-to-rational map validated
against the component structure.  On a rational interval a section is an
exact piecewise-linear function: affine pieces with rational slope and
intercept partitioning the domain, continuous across interior breakpoints.

The locally constant rational functions are exactly the sections with zero
slope everywhere (see :func:`is_locally_constant`).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence, Union

from .topology import (
    Atom,
    IntervalOpen,
    IntervalSpace,
    OpenSet,
    PosetOpen,
    PosetSpace,
    TopologyError,
    atoms_intersection,
    components,
    interior,
    is_subset,
    join,
    meet,
    normalize_atoms,
)

__all__ = [
    "SectionError",
    "ExactnessError",
    "PosetSection",
    "IntervalSection",
    "Section",
    "Piece",
    "Comparison",
    "GlueObstruction",
    "constant",
    "from_point_values",
    "from_breakpoints",
    "evaluate",
    "restrict",
    "add",
    "sub",
    "scale",
    "mul",
    "divide",
    "compare",
    "glue",
    "is_locally_constant",
    "negative_witness",
    "not_equal_witness",
]


class SectionError(ValueError):
    """Malformed section or domain mismatch."""


class ExactnessError(SectionError):
    """An operation would leave the exact piecewise-linear fragment."""


@dataclass(frozen=True)
class Piece:
    atom: Atom
    slope: Fraction
    intercept: Fraction

    def value_at(self, x: Fraction) -> Fraction:
        return self.slope * x + self.intercept


@dataclass(frozen=True)
class PosetSection:
    domain: PosetOpen
    values: tuple[tuple[str, Fraction], ...]

    def __post_init__(self) -> None:
        vals = dict(self.values)
        if set(vals) != set(self.domain.points):
            raise SectionError("section values must cover the domain exactly")
        for comp in components(self.domain):
            seen = {vals[p] for p in comp.points}
            if len(seen) > 1:
                raise SectionError(
                    f"section not constant on component {comp}: values {sorted(seen)}"
                )
        ordered = tuple((p, vals[p]) for p in self.domain.space.points if p in vals)
        object.__setattr__(self, "values", ordered)

    @property
    def space(self) -> PosetSpace:
        return self.domain.space

    def value_at(self, x: str) -> Fraction:
        for p, v in self.values:
            if p == x:
                return v
        raise SectionError(f"point {x} outside section domain")


@dataclass(frozen=True)
class IntervalSection:
    domain: IntervalOpen
    pieces: tuple[Piece, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "pieces", _canonical_pieces(self.domain, self.pieces))

    @property
    def space(self) -> IntervalSpace:
        return self.domain.space

    def value_at(self, x: Fraction) -> Fraction:
        for piece in self.pieces:
            if piece.atom.contains(x):
                return piece.value_at(x)
        raise SectionError(f"point {x} outside section domain")

    def breakpoints(self) -> tuple[Fraction, ...]:
        pts: list[Fraction] = []
        for piece in self.pieces:
            for v in (piece.atom.lo, piece.atom.hi):
                if v not in pts:
                    pts.append(v)
        return tuple(sorted(pts))


Section = Union[PosetSection, IntervalSection]


def _canonical_pieces(domain: IntervalOpen, pieces: Sequence[Piece]) -> tuple[Piece, ...]:
    """Validate coverage/continuity and merge adjacent equal-formula pieces."""
    by_atom: dict[Atom, list[Piece]] = {a: [] for a in domain.atoms}
    for piece in sorted(pieces, key=lambda p: (p.atom.lo, not p.atom.lo_closed)):
        for a in domain.atoms:
            inter = atoms_intersection((piece.atom,), (a,))
            if inter:
                by_atom[a].extend(Piece(x, piece.slope, piece.intercept) for x in inter)
    out: list[Piece] = []
    for a in domain.atoms:
        parts = by_atom[a]
        covered = normalize_atoms(tuple(p.atom for p in parts))
        if len(covered) != 1 or covered[0] != a:
            raise SectionError(f"pieces do not cover domain atom {a}")
        parts.sort(key=lambda p: (p.atom.lo, not p.atom.lo_closed))
        merged: list[Piece] = []
        for p in parts:
            if merged:
                prev = merged[-1]
                if prev.value_at(p.atom.lo) != p.value_at(p.atom.lo):
                    raise SectionError(
                        f"discontinuity at {p.atom.lo}: "
                        f"{prev.value_at(p.atom.lo)} vs {p.value_at(p.atom.lo)}"
                    )
                if (prev.slope, prev.intercept) == (p.slope, p.intercept):
                    if p.atom.hi > prev.atom.hi:
                        hi, hi_closed = p.atom.hi, p.atom.hi_closed
                    elif p.atom.hi == prev.atom.hi:
                        hi, hi_closed = prev.atom.hi, prev.atom.hi_closed or p.atom.hi_closed
                    else:
                        hi, hi_closed = prev.atom.hi, prev.atom.hi_closed
                    merged[-1] = Piece(
                        Atom(prev.atom.lo, hi, prev.atom.lo_closed, hi_closed), p.slope, p.intercept
                    )
                    continue
                # Overlapping pieces with different formulas disagree nearby.
                if p.atom.lo < prev.atom.hi:
                    raise SectionError(f"conflicting pieces overlap near {p.atom.lo}")
            merged.append(p)
        # Re-assign junction flags into the half-open canonical form.
        canon: list[Piece] = []
        for i, p in enumerate(merged):
            lo_closed = a.lo_closed if i == 0 else True
            hi_closed = a.hi_closed if i == len(merged) - 1 else False
            canon.append(Piece(Atom(p.atom.lo, p.atom.hi, lo_closed, hi_closed), p.slope, p.intercept))
        out.extend(canon)
    return tuple(out)


# ---------------------------------------------------------------------------
# Constructors


def constant(domain: OpenSet, value: Fraction) -> Section:
    value = Fraction(value)
    if isinstance(domain, PosetOpen):
        return PosetSection(domain, tuple((p, value) for p in sorted(domain.points)))
    return IntervalSection(
        domain, tuple(Piece(a, Fraction(0), value) for a in domain.atoms)
    )


def from_point_values(domain: PosetOpen, values: dict[str, Fraction]) -> PosetSection:
    return PosetSection(domain, tuple((p, Fraction(v)) for p, v in values.items()))


def from_breakpoints(
    domain: IntervalOpen, knots: Sequence[tuple[Fraction, Fraction]]
) -> IntervalSection:
    """Piecewise-linear interpolation through ``(breakpoint, value)`` pairs.

    The breakpoints must span the closure of every domain atom.
    """
    ks = [(Fraction(x), Fraction(v)) for x, v in knots]
    if len(ks) < 2:
        if len(ks) == 1:
            return constant(domain, ks[0][1])  # type: ignore[return-value]
        raise SectionError("need at least one breakpoint")
    for (x1, _), (x2, _) in zip(ks, ks[1:]):
        if x1 >= x2:
            raise SectionError("breakpoints must be strictly increasing")
    segs: list[Piece] = []
    for (x1, v1), (x2, v2) in zip(ks, ks[1:]):
        slope = (v2 - v1) / (x2 - x1)
        segs.append(Piece(Atom(x1, x2, True, True), slope, v1 - slope * x1))
    pieces: list[Piece] = []
    for a in domain.atoms:
        if ks[0][0] > a.lo or ks[-1][0] < a.hi:
            raise SectionError(f"breakpoints do not span domain atom {a}")
        for seg in segs:
            for clipped in atoms_intersection((seg.atom,), (a,)):
                pieces.append(Piece(clipped, seg.slope, seg.intercept))
    return IntervalSection(domain, tuple(pieces))


# ---------------------------------------------------------------------------
# Core operations


def evaluate(section: Section, x) -> Fraction:
    return section.value_at(x)


def restrict(section: Section, v: OpenSet) -> Section:
    if not is_subset(v, section.domain):
        raise SectionError(f"restriction target {v} is not inside the domain")
    if isinstance(section, PosetSection):
        return PosetSection(v, tuple((p, val) for p, val in section.values if p in v.points))
    pieces = []
    for piece in section.pieces:
        for clipped in atoms_intersection((piece.atom,), v.atoms):
            pieces.append(Piece(clipped, piece.slope, piece.intercept))
    return IntervalSection(v, tuple(pieces))


def _require_same_domain(f: Section, g: Section) -> None:
    if f.domain != g.domain:
        raise SectionError("sections must share a domain (restrict first)")


def _zip_cells(f: IntervalSection, g: IntervalSection) -> list[tuple[Atom, Piece, Piece]]:
    """Common refinement of two sections over a shared domain."""
    out = []
    for pf in f.pieces:
        for pg in g.pieces:
            for cell in atoms_intersection((pf.atom,), (pg.atom,)):
                out.append((cell, pf, pg))
    out.sort(key=lambda t: (t[0].lo, not t[0].lo_closed))
    return out


def add(f: Section, g: Section) -> Section:
    _require_same_domain(f, g)
    if isinstance(f, PosetSection):
        gv = dict(g.values)
        return PosetSection(f.domain, tuple((p, v + gv[p]) for p, v in f.values))
    pieces = [
        Piece(cell, pf.slope + pg.slope, pf.intercept + pg.intercept)
        for cell, pf, pg in _zip_cells(f, g)
    ]
    return IntervalSection(f.domain, tuple(pieces))


def scale(f: Section, c: Fraction) -> Section:
    c = Fraction(c)
    if isinstance(f, PosetSection):
        return PosetSection(f.domain, tuple((p, c * v) for p, v in f.values))
    return IntervalSection(
        f.domain, tuple(Piece(p.atom, c * p.slope, c * p.intercept) for p in f.pieces)
    )


def sub(f: Section, g: Section) -> Section:
    return add(f, scale(g, Fraction(-1)))


def mul(f: Section, g: Section) -> Section:
    """Exact pointwise product.

    Stays piecewise-linear only when, on every refinement cell, at least one
    factor has zero slope; other combinations are rejected rather than
    approximated.
    """
    _require_same_domain(f, g)
    if isinstance(f, PosetSection):
        gv = dict(g.values)
        return PosetSection(f.domain, tuple((p, v * gv[p]) for p, v in f.values))
    pieces = []
    for cell, pf, pg in _zip_cells(f, g):
        if pf.slope == 0:
            pieces.append(Piece(cell, pf.intercept * pg.slope, pf.intercept * pg.intercept))
        elif pg.slope == 0:
            pieces.append(Piece(cell, pg.intercept * pf.slope, pg.intercept * pf.intercept))
        else:
            raise ExactnessError(
                f"product is quadratic on {cell}: slopes {pf.slope} and {pg.slope}"
            )
    return IntervalSection(f.domain, tuple(pieces))


def divide(num: Section, den: Section) -> Section | None:
    """Exact quotient when it is piecewise-linear, else ``None``.

    Per cell the quotient is affine when the denominator is constant, or
    constant when numerator and denominator are proportional.  The
    denominator must not vanish anywhere on the domain.
    """
    _require_same_domain(num, den)
    if isinstance(num, PosetSection):
        dv = dict(den.values)
        if any(dv[p] == 0 for p, _ in num.values):
            return None
        return PosetSection(num.domain, tuple((p, v / dv[p]) for p, v in num.values))
    pieces = []
    for cell, pn, pd in _zip_cells(num, den):
        if pd.slope == 0:
            if pd.intercept == 0:
                return None
            pieces.append(Piece(cell, pn.slope / pd.intercept, pn.intercept / pd.intercept))
            continue
        root = -pd.intercept / pd.slope
        if cell.contains(root):
            return None
        if pn.slope * pd.intercept == pn.intercept * pd.slope:
            pieces.append(Piece(cell, Fraction(0), pn.slope / pd.slope))
        else:
            return None
    try:
        return IntervalSection(num.domain, tuple(pieces))
    except SectionError:
        return None


def is_locally_constant(f: Section) -> bool:
    if isinstance(f, PosetSection):
        return True
    return all(p.slope == 0 for p in f.pieces)


# ---------------------------------------------------------------------------
# Comparison


@dataclass(frozen=True)
class Comparison:
    lt: OpenSet
    gt: OpenSet
    eq: OpenSet


def _affine_region(space: IntervalSpace, cell: Atom, m: Fraction, c: Fraction, rel: str) -> list[Atom]:
    """Sub-atoms of ``cell`` where ``m*x + c  rel  0`` (rel in lt/gt/eq)."""
    if m == 0:
        holds = c < 0 if rel == "lt" else c > 0 if rel == "gt" else c == 0
        return [cell] if holds else []
    root = -c / m
    if rel == "eq":
        return [Atom(root, root, True, True)] if cell.contains(root) else []
    below = (rel == "lt") == (m > 0)
    if below:
        if root <= space.lo:
            return []
        half = Atom(space.lo, root, True, False)
    else:
        if root >= space.hi:
            return []
        half = Atom(root, space.hi, False, True)
    return list(atoms_intersection((half,), (cell,)))


def compare(f: Section, g: Section, on: OpenSet) -> Comparison:
    """Truth values of ``f < g``, ``f > g`` and the interior of ``f = g``.

    All crossings of rational piecewise-linear functions are rational, so the
    result is exact.
    """
    if not (is_subset(on, f.domain) and is_subset(on, g.domain)):
        raise SectionError("comparison region must lie inside both domains")
    fr = restrict(f, on)
    gr = restrict(g, on)
    if isinstance(fr, PosetSection):
        gv = dict(gr.values)  # type: ignore[union-attr]
        lt_pts: set[str] = set()
        gt_pts: set[str] = set()
        eq_pts: set[str] = set()
        for comp in components(on):
            sample = next(iter(comp.points))
            fv, gvv = fr.value_at(sample), gv[sample]
            target = lt_pts if fv < gvv else gt_pts if fv > gvv else eq_pts
            target |= comp.points
        space = on.space
        return Comparison(
            PosetOpen(space, frozenset(lt_pts)),
            PosetOpen(space, frozenset(gt_pts)),
            PosetOpen(space, frozenset(eq_pts)),
        )
    space = on.space
    diff = sub(fr, gr)
    lt_atoms: list[Atom] = []
    gt_atoms: list[Atom] = []
    eq_atoms: list[Atom] = []
    for piece in diff.pieces:  # type: ignore[union-attr]
        lt_atoms.extend(_affine_region(space, piece.atom, piece.slope, piece.intercept, "lt"))
        gt_atoms.extend(_affine_region(space, piece.atom, piece.slope, piece.intercept, "gt"))
        eq_atoms.extend(_affine_region(space, piece.atom, piece.slope, piece.intercept, "eq"))
    lt = IntervalOpen(space, normalize_atoms(lt_atoms))
    gt = IntervalOpen(space, normalize_atoms(gt_atoms))
    eq = meet(interior(space, normalize_atoms(eq_atoms)), on)
    return Comparison(lt, gt, eq)


# ---------------------------------------------------------------------------
# Gluing


@dataclass(frozen=True)
class GlueObstruction:
    point: object
    first: Fraction
    second: Fraction

    def __str__(self) -> str:
        return f"disagreement at {self.point}: {self.first} vs {self.second}"


def glue(members: Sequence[Section]):
    """Collate a compatible family; return the unique section or the obstruction."""
    if not members:
        raise SectionError("nothing to glue")
    first = members[0]
    if isinstance(first, PosetSection):
        values: dict[str, Fraction] = {}
        domain_points: set[str] = set()
        for m in members:
            domain_points |= m.domain.points
            for p, v in m.values:
                if p in values and values[p] != v:
                    return GlueObstruction(p, values[p], v)
                values[p] = v
        domain = PosetOpen(first.space, frozenset(domain_points))
        return PosetSection(domain, tuple(values.items()))
    domain = members[0].domain
    for m in members[1:]:
        domain = join(domain, m.domain)
    all_pieces: list[Piece] = []
    for m in members:
        all_pieces.extend(m.pieces)  # type: ignore[union-attr]
    # Check agreement on every pairwise positive-length overlap first.
    for i, a in enumerate(all_pieces):
        for b in all_pieces[i + 1 :]:
            for cell in atoms_intersection((a.atom,), (b.atom,)):
                if (a.slope, a.intercept) == (b.slope, b.intercept):
                    continue
                witness = cell.sample()
                if a.value_at(witness) == b.value_at(witness):
                    if cell.is_point():
                        continue
                    # Affine maps agree in at most one point of the cell.
                    witness = (witness + cell.hi) / 2
                    if witness == cell.hi and not cell.hi_closed:
                        witness = (cell.lo + 3 * cell.hi) / 4
                    if a.value_at(witness) == b.value_at(witness):
                        continue
                return GlueObstruction(witness, a.value_at(witness), b.value_at(witness))
    return IntervalSection(domain, tuple(all_pieces))


# ---------------------------------------------------------------------------
# Pointwise witnesses (exact, endpoint-based)


def negative_witness(f: Section):
    """A point of the domain where the section is negative, or ``None``."""
    if isinstance(f, PosetSection):
        for p, v in f.values:
            if v < 0:
                return p
        return None
    for piece in f.pieces:
        for x in (piece.atom.lo, piece.atom.hi, piece.atom.sample()):
            if piece.atom.contains(x) and piece.value_at(x) < 0:
                return x
        # Negative limit at an excluded endpoint means negative just inside.
        for x, other in ((piece.atom.lo, piece.atom.hi), (piece.atom.hi, piece.atom.lo)):
            if not piece.atom.contains(x) and piece.value_at(x) < 0:
                inner = (x + other) / 2
                while not (piece.atom.contains(inner) and piece.value_at(inner) < 0):
                    inner = (x + inner) / 2
                return inner
    return None


def not_equal_witness(f: Section, value: Fraction):
    """A point where the section differs from a constant, or ``None``."""
    value = Fraction(value)
    if isinstance(f, PosetSection):
        for p, v in f.values:
            if v != value:
                return p
        return None
    for piece in f.pieces:
        candidates = [piece.atom.sample(), piece.atom.lo, piece.atom.hi]
        for x in candidates:
            if piece.atom.contains(x) and piece.value_at(x) != value:
                return x
        if piece.slope != 0:
            # Affine non-constant: any second point differs.
            x = (piece.atom.lo + piece.atom.sample()) / 2
            if piece.atom.contains(x) and piece.value_at(x) != value:
                return x
    return None
