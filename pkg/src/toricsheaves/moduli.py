"""Torus-fixed-point enumeration and Euler-characteristic generating
functions on smooth complete toric surfaces.

Rank-1 gauge-fixed torsion-free sheaf data on a surface is a monomial-ideal
staircase (a 2D partition) at each maximal cone, twisted by a line bundle;
the generating function of the counts is the eta-like product
1/prod(1-q^k)^{e(X)}.  Rank-2 data is a reflexive hull determined by ray
profiles and flag lines, cut down at finitely many interior grid points;
strata are labelled by the coincidence pattern of the flag lines.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .chern import chern_character, second_chern_number
from .family import (
    CharFunction,
    CornerFamily,
    DeltaFamily,
    KIND_TORSION_FREE,
    RayFiltration,
    box_points,
    characteristic_function,
    cone_shift,
    gauge_fix,
    reflexive_from_filtrations,
    validate_torsion_free,
)
from .fan import Fan, euler_characteristic, validate_fan
from .intersect import divisor, divisor_class_equal, intersection_table, pair
from .stability import SEMISTABLE, STABLE, UNSTABLE
from .subspace import SubspaceQ


# ---------------------------------------------------------------------------
# truncated integer power series

@dataclass(frozen=True)
class IntSeries:
    """Truncated power series in q with integer coefficients."""

    order: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if len(self.coeffs) != self.order + 1:
            raise ValueError("coefficient count must be order + 1")

    @staticmethod
    def of(coeffs: Sequence[int], order: int) -> "IntSeries":
        cs = list(coeffs)[: order + 1]
        cs += [0] * (order + 1 - len(cs))
        return IntSeries(order, tuple(int(c) for c in cs))

    @staticmethod
    def one(order: int) -> "IntSeries":
        return IntSeries.of([1], order)

    def __add__(self, other: "IntSeries") -> "IntSeries":
        n = min(self.order, other.order)
        return IntSeries.of([a + b for a, b in zip(self.coeffs, other.coeffs)], n)

    def __mul__(self, other: "IntSeries") -> "IntSeries":
        n = min(self.order, other.order)
        out = [0] * (n + 1)
        for i, a in enumerate(self.coeffs[: n + 1]):
            if a == 0:
                continue
            for j in range(0, n + 1 - i):
                b = other.coeffs[j]
                if b:
                    out[i + j] += a * b
        return IntSeries(n, tuple(out))

    def inverse(self) -> "IntSeries":
        c0 = self.coeffs[0]
        if c0 not in (1, -1):
            raise ValueError("series is invertible only when the constant term is +-1")
        out = [c0] + [0] * self.order
        for k in range(1, self.order + 1):
            acc = 0
            for i in range(1, k + 1):
                acc += self.coeffs[i] * out[k - i]
            out[k] = -c0 * acc
        return IntSeries(self.order, tuple(out))

    def pow(self, e: int) -> "IntSeries":
        base = self if e >= 0 else self.inverse()
        out = IntSeries.one(self.order)
        for _ in range(abs(e)):
            out = out * base
        return out


def eta_like_product(exponent: int, order: int) -> IntSeries:
    """prod_{k>=1} (1 - q^k)^exponent, truncated."""
    out = IntSeries.one(order)
    for k in range(1, order + 1):
        factor = IntSeries.of([1] + [0] * (k - 1) + [-1], order)
        out = out * factor.pow(exponent)
    return out


# ---------------------------------------------------------------------------
# partitions

def partitions_of(n: int) -> Iterable[tuple[int, ...]]:
    """All partitions of n as weakly decreasing tuples, by enumeration."""
    def rec(remaining, cap):
        if remaining == 0:
            yield ()
            return
        for first in range(min(remaining, cap), 0, -1):
            for rest in rec(remaining - first, first):
                yield (first,) + rest

    yield from rec(n, n)


def partition_diagram(parts: Sequence[int]) -> frozenset[tuple[int, int]]:
    return frozenset((x, y) for y, p in enumerate(parts) for x in range(p))


def rank1_fixed_point_series(fan: Fan, order: int) -> IntSeries:
    """Coefficient of q^c: the number of tuples of 2D partitions, one per
    maximal cone, of total size c (counted by direct enumeration)."""
    if fan.rank != 2:
        raise ValueError("fixed point enumeration implemented for surfaces only")
    if validate_fan(fan):
        raise ValueError("fan is not a valid smooth complete surface fan")
    counts = [sum(1 for _ in partitions_of(k)) for k in range(order + 1)]
    acc = IntSeries.of([1], order)
    per_cone = IntSeries.of(counts, order)
    for _ in range(euler_characteristic(fan)):
        acc = acc * per_cone
    return acc


def rank2_p2_series(order: int) -> IntSeries:
    """Exact expansion of 1/prod(1-q^k)^6 * sum_{m,n>=1} q^{mn}/(1-q^{m+n-1})."""
    if order > 30:
        raise ValueError("order capped at 30")
    inner = [0] * (order + 1)
    for m in range(1, order + 1):
        for k in range(1, order + 1):
            if m * k > order:
                break
            step = m + k - 1
            e = m * k
            while e <= order:
                inner[e] += 1
                e += step
    return IntSeries.of(inner, order) * eta_like_product(-6, order)


# ---------------------------------------------------------------------------
# gauge-fixed characteristic function enumeration

@dataclass(frozen=True)
class StratumRecord:
    pattern: tuple[tuple[int, ...], ...]  # coincidence classes of gap rays
    mu_verdict: str
    point_component: bool
    free_line: bool


@dataclass
class ChiRecord:
    chi: CharFunction
    c2: Fraction
    witness: DeltaFamily
    strata: list[StratumRecord]


class BoxBoundError(ValueError):
    """The enumeration window was too small to certify the result."""


def _window_check(chi: CharFunction, bound: int):
    for _, g in chi.grids:
        if any(abs(x) >= bound for x in g.lo + g.hi):
            raise BoxBoundError(
                f"gauge-fixed box {g.lo}..{g.hi} reaches the window bound {bound}; "
                "increase --box"
            )


def enumerate_gauge_fixed_chi(
    fan: Fan, rank: int, c1: Sequence[int], c2_max: int, box_bound: int = 4
) -> list[ChiRecord]:
    """All gauge-fixed characteristic functions with the given rank, first
    Chern class and second Chern number at most c2_max, each with a
    realizing witness family and (for rank 2) its flag-line strata."""
    if fan.rank != 2:
        raise ValueError("enumeration implemented for surfaces only")
    if validate_fan(fan):
        raise ValueError("fan is not a valid smooth complete surface fan")
    if rank not in (1, 2):
        raise ValueError("enumeration implemented for rank <= 2")
    if c2_max < 0:
        return []
    c1 = [int(x) for x in c1]
    if len(c1) != fan.n_rays():
        raise ValueError("c1 must have one integer per ray")
    if rank == 1:
        return _enumerate_rank1(fan, c1, c2_max, box_bound)
    return _enumerate_rank2(fan, c1, c2_max, box_bound)


def _rank1_family(fan: Fan, kvec: Sequence[int],
                  diagrams: Sequence[frozenset[tuple[int, int]]]) -> DeltaFamily:
    corners = []
    full = SubspaceQ.full(1)
    zero = SubspaceQ.zero(1)
    for i, mc in enumerate(fan.max_cones):
        k = cone_shift(kvec, mc)
        diag = diagrams[i]
        ext = [0, 0]
        for cell in diag:
            ext[0] = max(ext[0], cell[0] + 1)
            ext[1] = max(ext[1], cell[1] + 1)
        lo = tuple(-x for x in k)
        hi = tuple(l + e for l, e in zip(lo, ext))
        vals = []
        for lam in box_points(lo, hi):
            shifted = tuple(a + b for a, b in zip(lam, k))
            vals.append(zero if shifted in diag else full)
        corners.append((i, CornerFamily(mc, lo, hi, tuple(vals), 1)))
    return DeltaFamily(KIND_TORSION_FREE, 1, tuple(corners))


def _enumerate_rank1(fan: Fan, c1, c2_max, box_bound) -> list[ChiRecord]:
    table = intersection_table(fan)
    l = len(fan.max_cones)
    records: dict[str, ChiRecord] = {}
    diagrams_by_size = {
        k: [partition_diagram(p) for p in partitions_of(k)] for k in range(c2_max + 1)
    }
    for total in range(c2_max + 1):
        for sizes in itertools.product(range(total + 1), repeat=l):
            if sum(sizes) != total:
                continue
            for diags in itertools.product(*(diagrams_by_size[s] for s in sizes)):
                fam = _rank1_family(fan, c1, diags)
                ch = chern_character(fam, fan, table)
                c2 = second_chern_number(ch, table)
                if c2 != total:
                    raise AssertionError("staircase size does not match c2")
                chi = characteristic_function(fam)
                gf, _ = gauge_fix(chi, fan)
                _window_check(gf, box_bound)
                key = gf.canonical()
                if key not in records:
                    # rank-1 torsion-free sheaves have no subsheaves of
                    # intermediate rank, so every stratum is a stable point
                    records[key] = ChiRecord(
                        gf, c2, fam,
                        [StratumRecord((), STABLE, True, False)],
                    )
    return sorted(records.values(), key=lambda r: (r.c2, r.chi.canonical()))


def _set_partitions(items: Sequence[int]) -> Iterable[tuple[tuple[int, ...], ...]]:
    items = list(items)
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for sub in _set_partitions(rest):
        for i in range(len(sub)):
            yield tuple(
                tuple(sorted(block + (first,))) if i == j else block
                for j, block in enumerate(sub)
            )
        yield tuple(sorted(sub + ((first,),)))


_LINE_POOL = [(1, 0), (0, 1), (1, 1), (1, 2), (1, 3), (1, 4), (2, 1), (3, 1), (1, -1)]


def _pool_line(idx: int) -> SubspaceQ:
    if idx < len(_LINE_POOL):
        return SubspaceQ.span([_LINE_POOL[idx]], 2)
    return SubspaceQ.span([(1, idx)], 2)


def _rank2_cuts(fam: DeltaFamily, budget: int):
    """Drop patterns at interior grid points with total size <= budget,
    realized as explicit subspace grids (or skipped when infeasible).

    The hull boxes are padded by the budget first: a quotient of length c
    can reach at most c steps beyond the saturation corner, since the set
    of dropped points is downward closed inside the full-value region.
    """
    if budget > 0:
        fam = fam.map_corners(lambda g: g.pad_top(budget))
    interior = []
    for i, grid in fam.corners:
        for lam in grid.points():
            if all(x < h for x, h in zip(lam, grid.hi)):
                interior.append((i, lam))
    yield fam, False
    for t in range(1, budget + 1):
        for combo in itertools.combinations_with_replacement(interior, t):
            drops: dict[tuple[int, tuple[int, ...]], int] = {}
            for key in combo:
                drops[key] = drops.get(key, 0) + 1
            if any(v > 2 for v in drops.values()):
                continue
            out = _realize_cut(fam, drops)
            if out is not None:
                yield out


def _realize_cut(fam: DeltaFamily, drops: dict) -> tuple[DeltaFamily, bool] | None:
    corners = []
    free_used = False
    used_lines = {v for _, g in fam.corners for v in g.values if v.dim == 1}
    pool_at = len(used_lines) + 3
    for i, grid in fam.corners:
        dims = {}
        for lam in grid.points():
            d = grid._entry(lam).dim - drops.get((i, lam), 0)
            if d < 0:
                return None
            dims[lam] = d
        for lam in grid.points():
            for k in range(grid.ndim()):
                nxt = tuple(x + (1 if c == k else 0) for c, x in enumerate(lam))
                if nxt in dims and dims[nxt] < dims[lam]:
                    return None
        # cluster the dim-1 points; each cluster carries a single line
        ones = [lam for lam, d in dims.items() if d == 1]
        parent = {lam: lam for lam in ones}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for lam in ones:
            for k in range(grid.ndim()):
                nxt = tuple(x + (1 if c == k else 0) for c, x in enumerate(lam))
                if nxt in parent:
                    parent[find(lam)] = find(nxt)
        clusters: dict
        clusters = {}
        for lam in ones:
            clusters.setdefault(find(lam), []).append(lam)
        line_of: dict[tuple[int, ...], SubspaceQ] = {}
        for members in clusters.values():
            forced = {grid._entry(lam) for lam in members if grid._entry(lam).dim == 1}
            if len(forced) > 1:
                return None
            if forced:
                line = forced.pop()
            else:
                line = _pool_line(pool_at)
                pool_at += 1
                free_used = True
            for lam in members:
                here = grid._entry(lam)
                if here.dim == 2 or here == line:
                    line_of[lam] = line
                else:
                    return None
        vals = []
        for lam in grid.points():
            d = dims[lam]
            if d == 0:
                vals.append(SubspaceQ.zero(2))
            elif d == 1:
                vals.append(line_of[lam])
            else:
                vals.append(grid._entry(lam))
        corners.append((i, CornerFamily(grid.cone, grid.lo, grid.hi, tuple(vals), 2)))
    return DeltaFamily(KIND_TORSION_FREE, 2, tuple(corners)), free_used


def _profile_verdict(gaps, deg, pattern) -> str:
    """Slope verdict of a rank-2 reflexive hull from its flag data alone:
    margins of the flag lines (one per coincidence class) and of a generic
    line against (1/2) sum gap_j deg_j."""
    total = sum(g * d for g, d in zip(gaps, deg))
    margins = [sum(gaps[j] * deg[j] for j in block) - total / 2 for block in pattern]
    margins.append(-total / 2)
    worst = max(margins)
    if worst > 0:
        return UNSTABLE
    if worst == 0:
        return SEMISTABLE
    return STABLE


def _enumerate_rank2(fan: Fan, c1, c2_max, box_bound, ample=None) -> list[ChiRecord]:
    """Rank-2 core: every torsion-free family is a reflexive hull (ray
    profiles plus flag lines) cut down at interior grid points, and the
    slope verdict is determined by the flag data alone, so unstable hulls
    are pruned before cut enumeration.  Only characteristic functions with
    a slope-stable stratum are returned; semistable strata of those
    functions are recorded alongside.  The unconstrained set is infinite
    (split hulls of arbitrarily negative c2 repaired by cuts, and
    equal-slope split pairs under unbounded relative twists), and only the
    stable-capable core is finite and window-independent."""
    from .intersect import find_ample

    table = intersection_table(fan)
    n = fan.n_rays()
    window = range(-box_bound, box_bound + 1)
    gap_window = range(0, box_bound + 1)
    ample = ample if ample is not None else find_ample(fan)
    records: dict[str, ChiRecord] = {}
    c1_div = divisor(c1, fan)
    unit = lambda j: [1 if i == j else 0 for i in range(n)]
    deg = [pair(divisor(ample, fan), divisor(unit(j), fan), table) for j in range(n)]
    for a_vec in itertools.product(window, repeat=n):
        for gaps in itertools.product(gap_window, repeat=n):
            cand = [-(2 * a_vec[j] + gaps[j]) for j in range(n)]
            if not divisor_class_equal(divisor(cand, fan), c1_div, fan):
                continue
            gap_rays = [j for j in range(n) if gaps[j] > 0]
            for pattern in _set_partitions(gap_rays):
                pat = tuple(sorted(pattern))
                verdict = _profile_verdict(gaps, deg, pat)
                if verdict == UNSTABLE:
                    continue
                lines = {}
                for ci, block in enumerate(pat):
                    for j in block:
                        lines[j] = _pool_line(ci)
                filts = []
                for j in range(n):
                    if gaps[j] == 0:
                        filts.append(RayFiltration(j, ((a_vec[j], SubspaceQ.full(2)),)))
                    else:
                        filts.append(
                            RayFiltration(
                                j,
                                ((a_vec[j], lines[j]), (a_vec[j] + gaps[j], SubspaceQ.full(2))),
                            )
                        )
                hull = reflexive_from_filtrations(filts, fan)
                ch = chern_character(hull, fan, table)
                if not divisor_class_equal(ch.d, c1_div, fan):
                    raise AssertionError("hull c1 drifted from the profile")
                c2_hull = second_chern_number(ch, table)
                budget = c2_max - c2_hull
                if budget < 0 or c2_hull.denominator != 1:
                    continue
                for fam, free_used in _rank2_cuts(hull, int(budget)):
                    if validate_torsion_free(fam, fan):
                        continue
                    c2 = second_chern_number(chern_character(fam, fan, table), table)
                    if c2 > c2_max:
                        continue
                    chi = characteristic_function(fam)
                    gf, _ = gauge_fix(chi, fan)
                    key = gf.canonical()
                    if key not in records:
                        records[key] = ChiRecord(gf, c2, fam, [])
                    rec = records[key]
                    existing = next((s for s in rec.strata if s.pattern == pat), None)
                    if existing is None:
                        rec.strata.append(
                            StratumRecord(pat, verdict, len(pat) <= 3 and not free_used, free_used)
                        )
                    elif free_used and not existing.free_line:
                        rec.strata.remove(existing)
                        rec.strata.append(StratumRecord(pat, verdict, False, True))
    kept = [
        r for r in records.values()
        if any(s.mu_verdict == STABLE for s in r.strata)
    ]
    for r in kept:
        _window_check(r.chi, box_bound)
    return sorted(kept, key=lambda r: (r.c2, r.chi.canonical()))
