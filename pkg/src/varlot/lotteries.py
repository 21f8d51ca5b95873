"""Simplex-valued sections: variable lotteries with (possibly partial) support.

A lottery over a prize set assigns one section per supported prize; the
coordinates are non-negative and sum to one at every point of the domain,
both checked exactly.  Prizes outside the support are implicitly zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import sections as sec
from .topology import OpenSet, is_subset

__all__ = [
    "LotteryError",
    "PrizeSet",
    "Lottery",
    "lottery_make",
    "delta",
    "coordinate",
    "mix",
    "restrict_lottery",
    "glue_lotteries",
    "lotteries_equal",
    "is_constant_lottery",
]


class LotteryError(ValueError):
    """Simplex violation or mismatched prize structure."""


@dataclass(frozen=True)
class PrizeSet:
    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.names:
            raise LotteryError("prize set must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise LotteryError("prize names must be distinct")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise LotteryError(f"unknown prize {name}") from None


@dataclass(frozen=True)
class Lottery:
    prizes: PrizeSet
    domain: OpenSet
    coords: tuple[tuple[str, sec.Section], ...]

    @property
    def support(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.coords)

    def coord(self, name: str) -> sec.Section:
        """Coordinate section for a prize; implicit zero outside the support."""
        self.prizes.index(name)
        for n, s in self.coords:
            if n == name:
                return s
        return sec.constant(self.domain, Fraction(0))


def lottery_make(
    prizes: PrizeSet, domain: OpenSet, coords: dict[str, sec.Section]
) -> Lottery:
    """Validate coordinates: each >= 0 on the domain and summing to one exactly."""
    ordered: list[tuple[str, sec.Section]] = []
    for name in prizes.names:
        if name not in coords:
            continue
        s = coords[name]
        if s.domain != domain:
            if not is_subset(domain, s.domain):
                raise LotteryError(f"coordinate for {name} not defined on the lottery domain")
            s = sec.restrict(s, domain)
        ordered.append((name, s))
    unknown = set(coords) - set(prizes.names)
    if unknown:
        raise LotteryError(f"coordinates for unknown prizes {sorted(unknown)}")
    if not ordered:
        raise LotteryError("a lottery needs at least one supported prize")
    total = ordered[0][1]
    for _, s in ordered[1:]:
        total = sec.add(total, s)
    witness = sec.not_equal_witness(total, Fraction(1))
    if witness is not None:
        raise LotteryError(
            f"coordinates sum to {total.value_at(witness)} != 1 at {witness}"
        )
    for name, s in ordered:
        witness = sec.negative_witness(s)
        if witness is not None:
            raise LotteryError(
                f"coordinate for {name} is negative at {witness}: {s.value_at(witness)}"
            )
    return Lottery(prizes, domain, tuple(ordered))


def delta(prizes: PrizeSet, domain: OpenSet, name: str) -> Lottery:
    """The constant lottery assigning probability one to a single prize."""
    prizes.index(name)
    return Lottery(prizes, domain, ((name, sec.constant(domain, Fraction(1))),))


def coordinate(p: Lottery, name: str) -> sec.Section:
    return p.coord(name)


def restrict_lottery(p: Lottery, v: OpenSet) -> Lottery:
    return Lottery(
        p.prizes, v, tuple((n, sec.restrict(s, v)) for n, s in p.coords)
    )


def mix(a: sec.Section, p: Lottery, q: Lottery) -> Lottery:
    """The weighted average ``a*p + (1-a)*q``, coordinatewise.

    ``a`` must take values in [0, 1] on the common domain.  Exactness rule:
    on every cell either the weight or the coordinate difference must be
    constant, otherwise the product would be quadratic and is rejected.
    """
    if p.prizes != q.prizes:
        raise LotteryError("mixture of lotteries over different prize sets")
    domain = p.domain
    if q.domain != domain or a.domain != domain:
        raise LotteryError("mixture operands must share a domain (restrict first)")
    neg = sec.negative_witness(a)
    if neg is not None:
        raise LotteryError(f"mixing weight below 0 at {neg}")
    one_minus = sec.sub(sec.constant(domain, Fraction(1)), a)
    neg = sec.negative_witness(one_minus)
    if neg is not None:
        raise LotteryError(f"mixing weight above 1 at {neg}")
    support = [n for n in p.prizes.names if n in set(p.support) | set(q.support)]
    coords: dict[str, sec.Section] = {}
    for name in support:
        pc = p.coord(name)
        qc = q.coord(name)
        # a*pc + (1-a)*qc == qc + a*(pc - qc); one product only.
        coords[name] = sec.add(qc, sec.mul(a, sec.sub(pc, qc)))
    return lottery_make(p.prizes, domain, coords)


def glue_lotteries(members: Sequence[Lottery]):
    """Collate lotteries coordinatewise; revalidate the simplex invariants."""
    if not members:
        raise LotteryError("nothing to glue")
    prizes = members[0].prizes
    for m in members[1:]:
        if m.prizes != prizes:
            raise LotteryError("cannot glue lotteries over different prize sets")
    support: list[str] = [
        n for n in prizes.names if any(n in m.support for m in members)
    ]
    glued: dict[str, sec.Section] = {}
    domain = members[0].domain
    from .topology import join

    for m in members[1:]:
        domain = join(domain, m.domain)
    for name in support:
        result = sec.glue([m.coord(name) for m in members])
        if isinstance(result, sec.GlueObstruction):
            return result
        glued[name] = result
    return lottery_make(prizes, domain, glued)


def lotteries_equal(p: Lottery, q: Lottery) -> bool:
    """Pointwise equality over a shared domain."""
    if p.prizes != q.prizes or p.domain != q.domain:
        return False
    for name in p.prizes.names:
        diff = sec.sub(p.coord(name), q.coord(name))
        if sec.not_equal_witness(diff, Fraction(0)) is not None:
            return False
    return True


def is_constant_lottery(p: Lottery) -> bool:
    if not all(sec.is_locally_constant(s) for _, s in p.coords):
        return False
    # Locally constant and equal across components: a single simplex point.
    for _, s in p.coords:
        if isinstance(s, sec.PosetSection):
            vals = {v for _, v in s.values}
            if len(vals) > 1:
                return False
        else:
            vals = {piece.intercept for piece in s.pieces}
            if len(vals) > 1:
                return False
    return True
