"""CSV plot data for scenario runs.

One file per named section (``x,value`` sampled at breakpoints plus an
optional evenly spaced grid on intervals; ``component,value`` on finite
spaces) and one per truth value (``interval_start,interval_end`` rows, or
``point`` rows on finite spaces).
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

from . import sections as sec
from .scenario import RunResult, Scenario
from .topology import IntervalOpen, OpenSet, PosetOpen, components

__all__ = ["csv_files", "export_plot_data"]


def _fnum(x: Fraction) -> str:
    return repr(float(x))


def _section_csv(s: sec.Section, grid: int) -> str:
    if isinstance(s, sec.PosetSection):
        rows = ["component,value"]
        for comp in components(s.domain):
            label = "|".join(p for p in s.domain.space.points if p in comp.points)
            sample = next(p for p in s.domain.space.points if p in comp.points)
            rows.append(f"{label},{_fnum(s.value_at(sample))}")
        return "\n".join(rows) + "\n"
    xs: list[Fraction] = []
    for piece in s.pieces:
        for x in (piece.atom.lo, piece.atom.hi):
            if x not in xs:
                xs.append(x)
    if grid > 0 and s.pieces:
        lo = s.pieces[0].atom.lo
        hi = s.pieces[-1].atom.hi
        for k in range(grid + 1):
            x = lo + (hi - lo) * Fraction(k, grid)
            if x not in xs:
                xs.append(x)
    rows = ["x,value"]
    for x in sorted(xs):
        for piece in s.pieces:
            if piece.atom.lo <= x <= piece.atom.hi:
                rows.append(f"{_fnum(x)},{_fnum(piece.value_at(x))}")
                break
    return "\n".join(rows) + "\n"


def _open_csv(u: OpenSet) -> str:
    if isinstance(u, PosetOpen):
        rows = ["point"]
        rows += [p for p in u.space.points if p in u.points]
        return "\n".join(rows) + "\n"
    rows = ["interval_start,interval_end"]
    for atom in u.atoms:
        rows.append(f"{_fnum(atom.lo)},{_fnum(atom.hi)}")
    return "\n".join(rows) + "\n"


def csv_files(sc: Scenario, result: RunResult) -> dict[str, str]:
    out: dict[str, str] = {}
    for name, kind, payload in result.artifacts:
        if kind == "section":
            out[f"{name}.csv"] = _section_csv(payload, sc.plot_grid)
        elif kind == "open":
            out[f"{name}.csv"] = _open_csv(payload)
    return out


def export_plot_data(sc: Scenario, result: RunResult, out_dir: str | Path) -> list[Path]:
    """Write the run's CSV artifacts; returns the written paths."""
    files = csv_files(sc, result)
    base = Path(out_dir)
    base.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in sorted(files.items()):
        path = base / name
        path.write_text(content, encoding="utf-8")
        written.append(path)
    return written
