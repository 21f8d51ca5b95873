"""Harmonizing per-face utility charts over a simplicial face poset.

Each face of a complex carries an affine chart: a utility value per vertex,
strictly compatible with the face's preference ordering.  Harmonization
derives charts for faces marked ``derive`` (adopting the zero/unit of the
lexicographically first sub-face and chaining the remaining vertices at unit
scale), computes the positive affine map along every attachment, and checks
functoriality on all composable pairs exactly.  An order reversal around a
cycle is an obstruction, not an error.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "ComplexError",
    "FaceChart",
    "FaceComplex",
    "AffineMap",
    "HarmonizationResult",
    "HarmonizationObstruction",
    "harmonize_complex",
]


class ComplexError(ValueError):
    pass


@dataclass(frozen=True)
class FaceChart:
    name: str
    vertices: tuple[str, ...]
    values: tuple[tuple[str, Fraction], ...] | None  # None: to be derived

    def value(self, v: str) -> Fraction:
        assert self.values is not None
        for n, x in self.values:
            if n == v:
                return x
        raise ComplexError(f"face {self.name} has no value for vertex {v}")


@dataclass(frozen=True)
class FaceComplex:
    faces: tuple[FaceChart, ...]

    def __post_init__(self) -> None:
        names = [f.name for f in self.faces]
        if len(set(names)) != len(names):
            raise ComplexError("face names must be distinct")
        vertex_faces = {f.name for f in self.faces if len(f.vertices) == 1}
        for f in self.faces:
            for v in f.vertices:
                if v not in vertex_faces:
                    raise ComplexError(f"face {f.name} uses undeclared vertex {v}")
            if f.values is not None:
                declared = {n for n, _ in f.values}
                if declared != set(f.vertices):
                    raise ComplexError(
                        f"face {f.name} must value exactly its vertices {sorted(f.vertices)}"
                    )

    def get(self, name: str) -> FaceChart:
        for f in self.faces:
            if f.name == name:
                return f
        raise ComplexError(f"unknown face {name}")

    def attachments(self) -> list[tuple[str, str]]:
        """All pairs (sigma, tau) with sigma a proper face of tau, plus identities."""
        out = []
        for s in self.faces:
            for t in self.faces:
                if set(s.vertices) <= set(t.vertices):
                    out.append((s.name, t.name))
        return out


@dataclass(frozen=True)
class AffineMap:
    scale: Fraction
    shift: Fraction

    def apply(self, x: Fraction) -> Fraction:
        return self.scale * x + self.shift

    def compose(self, inner: "AffineMap") -> "AffineMap":
        return AffineMap(self.scale * inner.scale, self.scale * inner.shift + self.shift)

    def __str__(self) -> str:
        return f"(scale {self.scale}, shift {self.shift})"


@dataclass(frozen=True)
class HarmonizationObstruction:
    cycle: tuple[str, ...]
    detail: str

    def __str__(self) -> str:
        return f"obstruction along {' -> '.join(self.cycle)}: {self.detail}"


@dataclass(frozen=True)
class HarmonizationResult:
    charts: tuple[FaceChart, ...]
    maps: tuple[tuple[str, str, AffineMap], ...]
    functorial_checks: int

    def chart(self, name: str) -> FaceChart:
        for c in self.charts:
            if c.name == name:
                return c
        raise ComplexError(f"unknown face {name}")

    def map_for(self, src: str, dst: str) -> AffineMap:
        for a, b, m in self.maps:
            if (a, b) == (src, dst):
                return m
        raise ComplexError(f"no attachment {src} -> {dst}")


def _solve_map(src: FaceChart, dst: FaceChart):
    """The affine map sending src's vertex values to dst's.

    Two distinct source values pin the map; a single value (or all-equal
    chart) is anchored at unit scale.  A non-positive scale or an
    inconsistent extra vertex is an obstruction detail.
    """
    shared = [v for v in src.vertices]
    pairs = [(src.value(v), dst.value(v)) for v in shared]
    base = pairs[0]
    pinned = None
    for x, y in pairs[1:]:
        if x != base[0]:
            pinned = (x, y)
            break
    if pinned is None:
        return AffineMap(Fraction(1), base[1] - base[0]), None
    scale = (pinned[1] - base[1]) / (pinned[0] - base[0])
    if scale <= 0:
        return None, f"order-reversing scale {scale}"
    shift = base[1] - scale * base[0]
    m = AffineMap(scale, shift)
    for v in shared:
        if m.apply(src.value(v)) != dst.value(v):
            return None, f"vertex {v} maps to {m.apply(src.value(v))}, chart says {dst.value(v)}"
    return m, None


def _derive_chart(face: FaceChart, complex_: FaceComplex, solved: dict[str, FaceChart]):
    """Adopt the first sub-face's zero/unit, then chain new vertices at unit scale."""
    subs = sorted(
        (
            f
            for f in complex_.faces
            if f.name != face.name and set(f.vertices) < set(face.vertices) and len(f.vertices) >= 2
        ),
        key=lambda f: f.name,
    )
    if not subs:
        raise ComplexError(f"face {face.name} marked derive but has no edges to adopt")
    values: dict[str, Fraction] = {}
    anchor = solved.get(subs[0].name, subs[0])
    if anchor.values is None:
        raise ComplexError(f"cannot derive {face.name}: {anchor.name} is underived")
    for v in anchor.vertices:
        values[v] = anchor.value(v)
    progress = True
    while progress and set(values) != set(face.vertices):
        progress = False
        for sub in subs:
            chart = solved.get(sub.name, sub)
            if chart.values is None:
                continue
            known = [v for v in chart.vertices if v in values]
            new = [v for v in chart.vertices if v not in values]
            if not known or not new:
                continue
            # Anchor on the first known vertex at unit scale.
            v0 = known[0]
            shift = values[v0] - chart.value(v0)
            for v in new:
                values[v] = chart.value(v) + shift
            progress = True
    missing = set(face.vertices) - set(values)
    if missing:
        raise ComplexError(
            f"cannot derive {face.name}: vertices {sorted(missing)} not reachable through edges"
        )
    ordered = tuple((v, values[v]) for v in face.vertices)
    return FaceChart(face.name, face.vertices, ordered)


def harmonize_complex(complex_: FaceComplex):
    """Derive missing charts, compute all attachment maps, verify functoriality.

    Returns the harmonized charts and maps, or an obstruction naming the
    attachment cycle that cannot be harmonized order-preservingly.
    """
    solved: dict[str, FaceChart] = {}
    for face in sorted(complex_.faces, key=lambda f: (len(f.vertices), f.name)):
        if face.values is not None:
            solved[face.name] = face
        else:
            solved[face.name] = _derive_chart(face, complex_, solved)
    maps: list[tuple[str, str, AffineMap]] = []
    for src_name, dst_name in complex_.attachments():
        src = solved[src_name]
        dst = solved[dst_name]
        m, err = _solve_map(src, dst)
        if m is None:
            return HarmonizationObstruction(
                _cycle_through(complex_, src_name, dst_name), err
            )
        maps.append((src_name, dst_name, m))
    by_pair = {(a, b): m for a, b, m in maps}
    checks = 0
    for a, b in complex_.attachments():
        for b2, c in complex_.attachments():
            if b2 != b:
                continue
            direct = by_pair.get((a, c))
            if direct is None:
                continue
            checks += 1
            composed = by_pair[(b, c)].compose(by_pair[(a, b)])
            src = solved[a]
            # Maps agree when they agree on the source chart's value range;
            # a degenerate range compares pointwise.
            values = {src.value(v) for v in src.vertices}
            if len(values) >= 2:
                agree = composed == direct
            else:
                x = next(iter(values))
                agree = composed.apply(x) == direct.apply(x)
            if not agree:
                return HarmonizationObstruction(
                    (a, b, c),
                    f"composite {composed} differs from direct {direct}",
                )
    return HarmonizationResult(
        tuple(solved[f.name] for f in complex_.faces), tuple(maps), checks
    )


def _cycle_through(complex_: FaceComplex, src: str, dst: str) -> tuple[str, ...]:
    """Name the edge faces meeting the failing attachment, for the report."""
    members = [src, dst]
    dst_vertices = set(complex_.get(dst).vertices)
    for f in complex_.faces:
        if f.name in members:
            continue
        if len(f.vertices) >= 2 and set(f.vertices) < dst_vertices:
            members.append(f.name)
    return tuple(members)
