"""Chern characters and Hilbert polynomials of equivariant sheaf data.

The Chern character is computed by the inclusion-exclusion weight formula:
each cone contributes the finite differences of its limit dimension grid,
signed by codimension, times the truncated exponential of minus its
character divisor.  Everything depends on the characteristic function only.
The Hilbert polynomial follows by Riemann-Roch against the Todd class.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .family import CharFunction, CornerFamily, DeltaFamily, DimGrid, box_points, characteristic_function
from .fan import ConeRef, Fan
from .intersect import (
    ChowClassSurface,
    IntersectionTable,
    degree,
    exp_divisor,
    intersection_table,
    is_ample,
    pair,
    todd_and_canonical,
)
from .polynomials import RatPoly


def as_char(x: DeltaFamily | CharFunction) -> CharFunction:
    return characteristic_function(x) if isinstance(x, DeltaFamily) else x


def restrict_char(chi: CharFunction, nu: ConeRef, fan: Fan) -> DimGrid:
    nu = tuple(sorted(nu))
    if not fan.is_cone(nu):
        raise ValueError(f"{list(nu)} is not a cone of the fan")
    gmap = chi.grid_map()
    for i in sorted(gmap):
        mc = fan.max_cones[i]
        if set(nu) <= set(mc):
            return gmap[i].face([mc.index(j) for j in nu])
    return DimGrid(nu, (0,) * len(nu), (0,) * len(nu), (0,))


@dataclass(frozen=True)
class BracketSlice:
    """Finite differences of a cone's dimension grid: the local multiplicity
    entering the Chern character."""

    cone: ConeRef
    entries: tuple[tuple[tuple[int, ...], int], ...]

    def total(self) -> int:
        return sum(v for _, v in self.entries)


def bracket_dims(x: DeltaFamily | CharFunction, cone: ConeRef, fan: Fan) -> BracketSlice:
    """For each lattice point of the cone's box, the alternating sum of the
    limit dimensions over the 2^dim shifted corners."""
    grid = restrict_char(as_char(x), cone, fan)
    t = grid.ndim()
    entries = []
    for lam in box_points(grid.lo, grid.hi):
        total = 0
        for eps in itertools.product((0, 1), repeat=t):
            shifted = tuple(a - e for a, e in zip(lam, eps))
            total += (-1) ** sum(eps) * grid.value(shifted)
        if total != 0:
            entries.append((lam, total))
    return BracketSlice(tuple(sorted(cone)), tuple(entries))


def chern_character(
    x: DeltaFamily | CharFunction, fan: Fan, table: IntersectionTable | None = None
) -> ChowClassSurface:
    """Chern character truncated to Chow degree 2 (surfaces)."""
    if fan.rank != 2:
        raise ValueError("Chern character truncation implemented for surfaces only")
    table = table or intersection_table(fan)
    chi = as_char(x)
    n = fan.n_rays()
    acc = ChowClassSurface.zero(n)
    for cone in fan.cones():
        codim = fan.rank - len(cone)
        sign = (-1) ** codim
        sl = bracket_dims(chi, cone, fan)
        for lam, mult in sl.entries:
            dvec = [Fraction(0)] * n
            for j, l in zip(cone, lam):
                dvec[j] = Fraction(-l)
            term = exp_divisor(tuple(dvec), table).scale(sign * mult)
            acc = acc.add(term)
    return acc


def c1_fast(x: DeltaFamily | CharFunction, fan: Fan) -> tuple[Fraction, ...]:
    """First Chern class from the ray filtration jumps alone:
    minus the jump-weighted positions, ray by ray."""
    chi = as_char(x)
    coeffs = []
    for j in range(fan.n_rays()):
        sl = bracket_dims(chi, (j,), fan)
        coeffs.append(-sum(Fraction(lam[0] * mult) for lam, mult in sl.entries))
    return tuple(coeffs)


def second_chern_number(ch: ChowClassSurface, table: IntersectionTable) -> Fraction:
    """c2 = c1^2/2 - ch2 as a rational number (degree of the point part)."""
    return pair(ch.d, ch.d, table) / 2 - ch.p


@dataclass(frozen=True)
class HilbertData:
    polynomial: RatPoly
    rank: Fraction
    degree: Fraction
    slope: Fraction | None


def hilbert_polynomial(
    x: DeltaFamily | CharFunction, fan: Fan, ample: Sequence, table: IntersectionTable | None = None
) -> RatPoly:
    """P(t) = deg{ch . exp(tH) . td}_2 as an exact rational polynomial."""
    table = table or intersection_table(fan)
    if not is_ample(ample, fan, table):
        raise ValueError("polarization is not ample")
    todd, _ = todd_and_canonical(fan)
    h = tuple(Fraction(c) for c in ample)
    cls = chern_character(x, fan, table).mul(todd, table)
    return RatPoly.of(
        [cls.p, pair(cls.d, h, table), cls.r0 * pair(h, h, table) / 2]
    )


def hilbert_data(
    x: DeltaFamily | CharFunction, fan: Fan, ample: Sequence, table: IntersectionTable | None = None
) -> HilbertData:
    """Hilbert polynomial with the rank/degree/slope extraction conventions:
    writing P(t) = sum a_i t^i / i!, rank = a_2(E)/a_2(O) and
    degree = a_1(E) - a_1(O) rank."""
    table = table or intersection_table(fan)
    p = hilbert_polynomial(x, fan, ample, table)
    todd, _ = todd_and_canonical(fan)
    h = tuple(Fraction(c) for c in ample)
    p_o = RatPoly.of([Fraction(1), pair(h, todd.d, table), pair(h, h, table) / 2])
    rank = p.coeff(2) / p_o.coeff(2)
    deg = p.coeff(1) - p_o.coeff(1) * rank
    slope = deg / rank if rank != 0 else None
    return HilbertData(p, rank, deg, slope)
