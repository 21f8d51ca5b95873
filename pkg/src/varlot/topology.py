"""Carriers, open sets, and Heyting algebra operations.

Two computable space models are supported:

* finite Alexandrov spaces given by a poset (opens are the up-sets), and
* rational closed intervals ``[lo, hi]`` whose opens are finite unions of
  relatively-open intervals with rational endpoints.

All endpoint arithmetic is exact (``fractions.Fraction``); there is no
floating point anywhere in the frame.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Iterator, Sequence, Union

__all__ = [
    "TopologyError",
    "PosetSpace",
    "IntervalSpace",
    "Space",
    "PosetOpen",
    "IntervalOpen",
    "OpenSet",
    "Atom",
    "space_from_poset",
    "interval_space",
    "meet",
    "join",
    "implies",
    "complement_interior",
    "not_within",
    "heyting",
    "interior",
    "is_subset",
    "components",
    "minimal_open",
    "is_classical",
    "enumerate_opens",
    "canonical_cover",
    "covers",
]


class TopologyError(ValueError):
    """Raised for malformed spaces, opens, or mismatched carriers."""


# ---------------------------------------------------------------------------
# Spaces


@dataclass(frozen=True)
class PosetSpace:
    """Finite Alexandrov space: points plus the relation ``x <= y``.

    ``leq`` is the reflexive-transitive closure of the declared pairs and is
    antisymmetric (checked by :func:`space_from_poset`).  Opens are up-sets.
    """

    points: tuple[str, ...]
    leq: frozenset[tuple[str, str]]

    def leq_holds(self, x: str, y: str) -> bool:
        return (x, y) in self.leq

    def up_closure(self, pts: Iterable[str]) -> frozenset[str]:
        base = set(pts)
        return frozenset(y for y in self.points if any((x, y) in self.leq for x in base))

    def is_up_set(self, pts: frozenset[str]) -> bool:
        return all((x, y) not in self.leq or y in pts for x in pts for y in self.points)

    def full(self) -> "PosetOpen":
        return PosetOpen(self, frozenset(self.points))

    def empty(self) -> "PosetOpen":
        return PosetOpen(self, frozenset())

    def open_from_points(self, pts: Iterable[str]) -> "PosetOpen":
        return PosetOpen(self, frozenset(pts))


@dataclass(frozen=True)
class IntervalSpace:
    """The carrier ``[lo, hi]`` with lo < hi, opens relative to the subspace."""

    lo: Fraction
    hi: Fraction

    def full(self) -> "IntervalOpen":
        return IntervalOpen(self, (Atom(self.lo, self.hi, True, True),))

    def empty(self) -> "IntervalOpen":
        return IntervalOpen(self, ())

    def open_from_atoms(self, atoms: Iterable["Atom"]) -> "IntervalOpen":
        return IntervalOpen(self, tuple(atoms))

    def contains_point(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi


Space = Union[PosetSpace, IntervalSpace]


def space_from_poset(points: Sequence[str], order_pairs: Iterable[tuple[str, str]]) -> PosetSpace:
    """Build the Alexandrov space of a poset from generating ``x <= y`` pairs.

    The pairs are closed reflexively and transitively; a cycle among distinct
    points is rejected with the offending cycle.
    """
    pts = tuple(dict.fromkeys(points))
    if not pts:
        raise TopologyError("poset needs at least one point")
    index = set(pts)
    rel = {(p, p) for p in pts}
    for x, y in order_pairs:
        if x not in index or y not in index:
            raise TopologyError(f"order pair ({x}, {y}) mentions unknown point")
        rel.add((x, y))
    # Floyd-Warshall style transitive closure on a tiny relation.
    changed = True
    while changed:
        changed = False
        for x, y in list(rel):
            for y2, z in list(rel):
                if y == y2 and (x, z) not in rel:
                    rel.add((x, z))
                    changed = True
    for x, y in rel:
        if x != y and (y, x) in rel:
            raise TopologyError(f"cycle among distinct points: {x} <= {y} <= {x}")
    return PosetSpace(pts, frozenset(rel))


def interval_space(lo: Fraction, hi: Fraction) -> IntervalSpace:
    lo, hi = Fraction(lo), Fraction(hi)
    if not lo < hi:
        raise TopologyError(f"interval carrier needs lo < hi, got [{lo}, {hi}]")
    return IntervalSpace(lo, hi)


# ---------------------------------------------------------------------------
# Interval atoms

# An Atom is a non-empty subinterval of the carrier with explicit endpoint
# inclusion flags.  General point sets (complements, equality loci) are plain
# tuples of atoms; degenerate atoms (lo == hi, both closed) represent points.


@dataclass(frozen=True)
class Atom:
    lo: Fraction
    hi: Fraction
    lo_closed: bool
    hi_closed: bool

    def __post_init__(self) -> None:
        if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
            raise TopologyError(f"empty atom ({self.lo}, {self.hi})")

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Fraction) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def sample(self) -> Fraction:
        """Some point inside the atom."""
        if self.is_point():
            return self.lo
        if self.lo_closed:
            return self.lo
        if self.hi_closed:
            return self.hi
        return (self.lo + self.hi) / 2

    def __str__(self) -> str:
        if self.is_point():
            return f"{{{self.lo}}}"
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{self.lo},{self.hi}{right}"


def _atoms_touch_or_overlap(a: Atom, b: Atom) -> bool:
    """a before-or-at b (a.lo <= b.lo): do they merge into one interval?"""
    if b.lo < a.hi:
        return True
    if b.lo == a.hi:
        return a.hi_closed or b.lo_closed
    return False


def normalize_atoms(atoms: Iterable[Atom]) -> tuple[Atom, ...]:
    """Sort and merge a finite union of atoms into disjoint separated atoms."""
    items = sorted(atoms, key=lambda a: (a.lo, not a.lo_closed, a.hi, a.hi_closed))
    out: list[Atom] = []
    for a in items:
        if out and _atoms_touch_or_overlap(out[-1], a):
            last = out[-1]
            if a.hi > last.hi:
                hi, hi_closed = a.hi, a.hi_closed
            elif a.hi == last.hi:
                hi, hi_closed = last.hi, last.hi_closed or a.hi_closed
            else:
                hi, hi_closed = last.hi, last.hi_closed
            out[-1] = Atom(last.lo, hi, last.lo_closed, hi_closed)
        else:
            out.append(a)
    return tuple(out)


def atoms_complement(space: IntervalSpace, atoms: Sequence[Atom]) -> tuple[Atom, ...]:
    """Complement within the carrier, as a normalized union of atoms."""
    out: list[Atom] = []
    cursor = space.lo
    cursor_closed = True
    for a in atoms:
        if cursor < a.lo or (cursor == a.lo and cursor_closed and not a.lo_closed):
            out.append(Atom(cursor, a.lo, cursor_closed, not a.lo_closed))
        cursor = a.hi
        cursor_closed = not a.hi_closed
    if cursor < space.hi or (cursor == space.hi and cursor_closed):
        out.append(Atom(cursor, space.hi, cursor_closed, True))
    return normalize_atoms(out)


def atoms_intersection(xs: Sequence[Atom], ys: Sequence[Atom]) -> tuple[Atom, ...]:
    out: list[Atom] = []
    for a in xs:
        for b in ys:
            lo = max(a.lo, b.lo)
            hi = min(a.hi, b.hi)
            if lo > hi:
                continue
            lo_closed = (a.contains(lo)) and (b.contains(lo))
            hi_closed = (a.contains(hi)) and (b.contains(hi))
            if lo == hi:
                if lo_closed and hi_closed:
                    out.append(Atom(lo, hi, True, True))
            elif lo < hi:
                out.append(Atom(lo, hi, lo_closed, hi_closed))
    return normalize_atoms(out)


def atoms_interior(space: IntervalSpace, atoms: Sequence[Atom]) -> tuple[Atom, ...]:
    """Interior relative to the carrier ``[lo, hi]`` of a normalized union."""
    out: list[Atom] = []
    for a in normalize_atoms(atoms):
        if a.is_point():
            continue
        lo_closed = a.lo_closed and a.lo == space.lo
        hi_closed = a.hi_closed and a.hi == space.hi
        out.append(Atom(a.lo, a.hi, lo_closed, hi_closed))
    return tuple(out)


# ---------------------------------------------------------------------------
# Open sets


@dataclass(frozen=True)
class PosetOpen:
    space: PosetSpace
    points: frozenset[str]

    def __post_init__(self) -> None:
        unknown = self.points - set(self.space.points)
        if unknown:
            raise TopologyError(f"points not in carrier: {sorted(unknown)}")
        if not self.space.is_up_set(self.points):
            raise TopologyError(f"{sorted(self.points)} is not up-closed")

    def is_empty(self) -> bool:
        return not self.points

    def is_full(self) -> bool:
        return self.points == set(self.space.points)

    def contains_point(self, x: str) -> bool:
        return x in self.points

    def __str__(self) -> str:
        if not self.points:
            return "∅"
        listed = [p for p in self.space.points if p in self.points]
        return "{" + ", ".join(listed) + "}"


@dataclass(frozen=True)
class IntervalOpen:
    space: IntervalSpace
    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        atoms = normalize_atoms(self.atoms)
        object.__setattr__(self, "atoms", atoms)
        for a in atoms:
            if a.lo < self.space.lo or a.hi > self.space.hi:
                raise TopologyError(f"atom {a} outside carrier [{self.space.lo}, {self.space.hi}]")
            if a.is_point():
                raise TopologyError(f"degenerate atom {a} is not relatively open")
            if a.lo_closed and a.lo != self.space.lo:
                raise TopologyError(f"atom {a}: interior left endpoint must be open")
            if a.hi_closed and a.hi != self.space.hi:
                raise TopologyError(f"atom {a}: interior right endpoint must be open")

    def is_empty(self) -> bool:
        return not self.atoms

    def is_full(self) -> bool:
        return (
            len(self.atoms) == 1
            and self.atoms[0].lo == self.space.lo
            and self.atoms[0].hi == self.space.hi
            and self.atoms[0].lo_closed
            and self.atoms[0].hi_closed
        )

    def contains_point(self, x: Fraction) -> bool:
        return any(a.contains(x) for a in self.atoms)

    def __str__(self) -> str:
        if not self.atoms:
            return "∅"
        return " ∪ ".join(str(a) for a in self.atoms)


OpenSet = Union[PosetOpen, IntervalOpen]


def _same_space(u: OpenSet, v: OpenSet) -> None:
    if u.space != v.space:
        raise TopologyError("open sets live on different spaces")


# ---------------------------------------------------------------------------
# Heyting operations


def meet(u: OpenSet, v: OpenSet) -> OpenSet:
    _same_space(u, v)
    if isinstance(u, PosetOpen):
        return PosetOpen(u.space, u.points & v.points)
    return IntervalOpen(u.space, atoms_intersection(u.atoms, v.atoms))


def join(u: OpenSet, v: OpenSet) -> OpenSet:
    _same_space(u, v)
    if isinstance(u, PosetOpen):
        return PosetOpen(u.space, u.points | v.points)
    return IntervalOpen(u.space, normalize_atoms(u.atoms + v.atoms))


def interior(space: Space, subset) -> OpenSet:
    """Largest open contained in an arbitrary subset of the carrier.

    For posets the subset is an iterable of points; for intervals it is an
    iterable of :class:`Atom` (degenerate point atoms allowed).
    """
    if isinstance(space, PosetSpace):
        pts = frozenset(subset)
        inside = frozenset(
            x for x in space.points if x in pts and space.up_closure([x]) <= pts
        )
        return PosetOpen(space, inside)
    return IntervalOpen(space, atoms_interior(space, tuple(subset)))


def complement_interior(u: OpenSet) -> OpenSet:
    """Heyting negation: the interior of the complement."""
    if isinstance(u, PosetOpen):
        return interior(u.space, frozenset(u.space.points) - u.points)
    return interior(u.space, atoms_complement(u.space, u.atoms))


def implies(u: OpenSet, v: OpenSet) -> OpenSet:
    """Heyting implication: interior of (complement of u) ∪ v."""
    _same_space(u, v)
    if isinstance(u, PosetOpen):
        subset = (frozenset(u.space.points) - u.points) | v.points
        return interior(u.space, subset)
    subset = normalize_atoms(atoms_complement(u.space, u.atoms) + v.atoms)
    return interior(u.space, subset)


def not_within(t: OpenSet, u: OpenSet) -> OpenSet:
    """Negation relative to the domain of discourse ``u``."""
    return meet(complement_interior(t), u)


def heyting(op: str, u: OpenSet, v: OpenSet | None = None) -> OpenSet:
    """Dispatch {meet|join|implies|not} with argument checking."""
    if op == "not":
        if v is not None:
            raise TopologyError("'not' takes one argument")
        return complement_interior(u)
    if v is None:
        raise TopologyError(f"'{op}' takes two arguments")
    if op == "meet":
        return meet(u, v)
    if op == "join":
        return join(u, v)
    if op == "implies":
        return implies(u, v)
    raise TopologyError(f"unknown Heyting operation '{op}'")


def is_subset(u: OpenSet, v: OpenSet) -> bool:
    _same_space(u, v)
    if isinstance(u, PosetOpen):
        return u.points <= v.points
    return meet(u, v) == u


# ---------------------------------------------------------------------------
# Structure


def components(u: OpenSet) -> tuple[OpenSet, ...]:
    """Connected components of an open set, in deterministic order.

    Posets: components of the comparability graph restricted to the open.
    Intervals: the maximal atoms of the normalized union.
    """
    if isinstance(u, IntervalOpen):
        return tuple(IntervalOpen(u.space, (a,)) for a in u.atoms)
    space = u.space
    remaining = set(u.points)
    comps: list[PosetOpen] = []
    for seed in space.points:
        if seed not in remaining:
            continue
        block = {seed}
        frontier = [seed]
        while frontier:
            x = frontier.pop()
            for y in list(remaining):
                if y not in block and (space.leq_holds(x, y) or space.leq_holds(y, x)):
                    block.add(y)
                    frontier.append(y)
        remaining -= block
        comps.append(PosetOpen(space, frozenset(block)))
    return tuple(comps)


def minimal_open(space: Space, x: str) -> PosetOpen:
    """The up-set of a point: the smallest open containing it (posets only)."""
    if not isinstance(space, PosetSpace):
        raise TopologyError("interval spaces have no minimal neighborhoods")
    if x not in space.points:
        raise TopologyError(f"unknown point {x}")
    return PosetOpen(space, space.up_closure([x]))


@dataclass(frozen=True)
class ClassicalityVerdict:
    classical: bool
    witness: OpenSet | None

    def __str__(self) -> str:
        if self.classical:
            return "classical"
        return f"non_classical (witness {self.witness})"


def is_classical(space: Space) -> ClassicalityVerdict:
    """Does every open have an open complement?

    For posets this holds exactly when the order is discrete; the witness is
    an open whose complement fails to be open.
    """
    if isinstance(space, PosetSpace):
        for x in space.points:
            for y in space.points:
                if x != y and space.leq_holds(x, y):
                    return ClassicalityVerdict(False, minimal_open(space, y))
        return ClassicalityVerdict(True, None)
    mid = (space.lo + space.hi) / 2
    witness = IntervalOpen(space, (Atom(space.lo, mid, False, False),))
    return ClassicalityVerdict(False, witness)


def enumerate_opens(space: PosetSpace) -> tuple[PosetOpen, ...]:
    """All opens of a finite Alexandrov space (up-sets), deterministic order."""
    if not isinstance(space, PosetSpace):
        raise TopologyError("only finite spaces have enumerable frames")
    opens: list[PosetOpen] = []
    n = len(space.points)
    for mask in range(1 << n):
        pts = frozenset(p for i, p in enumerate(space.points) if mask >> i & 1)
        if space.is_up_set(pts):
            opens.append(PosetOpen(space, pts))
    opens.sort(key=lambda u: (len(u.points), tuple(p in u.points for p in space.points)))
    return tuple(opens)


def canonical_cover(u: OpenSet) -> tuple[OpenSet, ...]:
    """A standard cover: minimal opens of each point (posets) or components."""
    if isinstance(u, PosetOpen):
        seen: list[PosetOpen] = []
        for x in u.space.points:
            if x in u.points:
                m = minimal_open(u.space, x)
                if m not in seen:
                    seen.append(m)
        return tuple(seen)
    return components(u)


def covers(parts: Sequence[OpenSet], u: OpenSet) -> bool:
    """Union-containment check: do the parts cover ``u`` exactly from inside?"""
    if not parts:
        return u.is_empty()
    acc = parts[0]
    for p in parts[1:]:
        acc = join(acc, p)
    return acc == u


def iter_sub_opens(u: PosetOpen) -> Iterator[PosetOpen]:
    """All opens contained in ``u`` (finite spaces)."""
    for v in enumerate_opens(u.space):
        if v.points <= u.points:
            yield v


def pairwise_meets(parts: Sequence[OpenSet]) -> Iterator[tuple[int, int, OpenSet]]:
    for (i, a), (j, b) in combinations(enumerate(parts), 2):
        yield i, j, meet(a, b)
