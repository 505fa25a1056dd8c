"""Intersection theory on smooth complete toric surfaces.

Divisor classes are rational coefficient vectors on the invariant divisors
V(rho), one per ray; the degree-2 Chow group is identified with Q times the
point class.  The intersection table is built from adjacency (adjacent
invariant curves meet transversally in one point) and the wall relation
n(rho_{i-1}) + n(rho_{i+1}) = -(D_i^2) n(rho_i).  A lattice-point counter
for nef divisors provides an independent Euler-characteristic oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .fan import Fan, validate_fan
from .polynomials import RatPoly
from .subspace import SubspaceQ

Divisor = tuple[Fraction, ...]


def divisor(coeffs: Sequence, fan: Fan) -> Divisor:
    if len(coeffs) != fan.n_rays():
        raise ValueError(
            f"divisor has {len(coeffs)} coefficients, fan has {fan.n_rays()} rays"
        )
    return tuple(Fraction(c) for c in coeffs)


@dataclass(frozen=True)
class IntersectionTable:
    fan: Fan
    matrix: tuple[tuple[Fraction, ...], ...]


def intersection_table(fan: Fan) -> IntersectionTable:
    if fan.rank != 2:
        raise ValueError("intersection table implemented for surfaces only")
    report = validate_fan(fan)
    if report:
        raise ValueError("invalid fan: " + "; ".join(report))
    n = fan.n_rays()
    mat = [[Fraction(0)] * n for _ in range(n)]
    adjacent = {frozenset(c) for c in fan.max_cones}
    for i in range(n):
        for j in range(n):
            if i != j and frozenset((i, j)) in adjacent:
                mat[i][j] = Fraction(1)
    for i in range(n):
        prev = fan.rays[(i - 1) % n]
        here = fan.rays[i]
        nxt = fan.rays[(i + 1) % n]
        s = (prev[0] + nxt[0], prev[1] + nxt[1])
        # s = a * here with a integral on a smooth complete surface
        if here[0] != 0:
            a = Fraction(s[0], here[0])
        else:
            a = Fraction(s[1], here[1])
        if (a * here[0], a * here[1]) != (Fraction(s[0]), Fraction(s[1])):
            raise ValueError(f"wall relation fails at ray {i}")
        mat[i][i] = -a
    return IntersectionTable(fan, tuple(tuple(row) for row in mat))


def pair(a: Sequence, b: Sequence, table: IntersectionTable) -> Fraction:
    n = len(table.matrix)
    if len(a) != n or len(b) != n:
        raise ValueError("divisor length does not match the fan")
    total = Fraction(0)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj != 0:
                total += Fraction(ai) * Fraction(bj) * table.matrix[i][j]
    return total


@dataclass(frozen=True)
class ChowClassSurface:
    """Chow class on a surface: rank part, divisor part, point part."""

    r0: Fraction
    d: tuple[Fraction, ...]
    p: Fraction

    @staticmethod
    def of(r0, d: Sequence, p) -> "ChowClassSurface":
        return ChowClassSurface(Fraction(r0), tuple(Fraction(x) for x in d), Fraction(p))

    @staticmethod
    def zero(n: int) -> "ChowClassSurface":
        return ChowClassSurface(Fraction(0), (Fraction(0),) * n, Fraction(0))

    def add(self, other: "ChowClassSurface") -> "ChowClassSurface":
        return ChowClassSurface(
            self.r0 + other.r0,
            tuple(a + b for a, b in zip(self.d, other.d)),
            self.p + other.p,
        )

    def scale(self, c) -> "ChowClassSurface":
        f = Fraction(c)
        return ChowClassSurface(f * self.r0, tuple(f * x for x in self.d), f * self.p)

    def mul(self, other: "ChowClassSurface", table: IntersectionTable) -> "ChowClassSurface":
        return ChowClassSurface(
            self.r0 * other.r0,
            tuple(self.r0 * x + other.r0 * y for x, y in zip(other.d, self.d)),
            self.r0 * other.p + other.r0 * self.p + pair(self.d, other.d, table),
        )


def exp_divisor(d: Sequence, table: IntersectionTable) -> ChowClassSurface:
    """exp(D) truncated to Chow degree 2: 1 + D + D^2/2."""
    dd = tuple(Fraction(x) for x in d)
    return ChowClassSurface(Fraction(1), dd, pair(dd, dd, table) / 2)


def degree(c: ChowClassSurface) -> Fraction:
    """Degree map: the coefficient of the point class."""
    return c.p


def class_equal(c1: ChowClassSurface, c2: ChowClassSurface, fan: Fan) -> bool:
    """Equality in the Chow ring: divisor parts may differ by relations
    sum_j <u, n(rho_j)> V(rho_j), u in M."""
    if c1.r0 != c2.r0 or c1.p != c2.p:
        return False
    return divisor_class_equal(c1.d, c2.d, fan)


def divisor_class_equal(d1: Sequence, d2: Sequence, fan: Fan) -> bool:
    n = fan.n_rays()
    relations = SubspaceQ.span(
        [[Fraction(fan.rays[j][k]) for j in range(n)] for k in range(fan.rank)], n
    )
    diff = [Fraction(a) - Fraction(b) for a, b in zip(d1, d2)]
    return relations.contains_vector(diff)


def todd_and_canonical(fan: Fan) -> tuple[ChowClassSurface, Divisor]:
    """Todd class (normalized so deg(td) = chi(O_X) = 1) and canonical divisor."""
    n = fan.n_rays()
    canonical = tuple(Fraction(-1) for _ in range(n))
    todd = ChowClassSurface(
        Fraction(1), tuple(Fraction(1, 2) for _ in range(n)), Fraction(1)
    )
    return todd, canonical


def is_nef(d: Sequence, fan: Fan, table: IntersectionTable | None = None) -> bool:
    """Nef iff the support function is convex across every wall, i.e. the
    divisor meets every invariant curve nonnegatively."""
    table = table or intersection_table(fan)
    n = fan.n_rays()
    dd = divisor(d, fan)
    basis = [tuple(Fraction(1 if j == i else 0) for j in range(n)) for i in range(n)]
    return all(pair(dd, basis[i], table) >= 0 for i in range(n))


def is_ample(d: Sequence, fan: Fan, table: IntersectionTable | None = None) -> bool:
    table = table or intersection_table(fan)
    n = fan.n_rays()
    dd = divisor(d, fan)
    basis = [tuple(Fraction(1 if j == i else 0) for j in range(n)) for i in range(n)]
    return all(pair(dd, basis[i], table) > 0 for i in range(n))


def find_ample(fan: Fan, bound: int = 4) -> Divisor:
    """Deterministic small ample divisor, by increasing sup-norm then lex."""
    table = intersection_table(fan)
    n = fan.n_rays()

    def vectors(radius):
        def rec(i):
            if i == n:
                yield ()
                return
            for x in range(radius + 1):
                for rest in rec(i + 1):
                    yield (x,) + rest

        for v in sorted(rec(0), key=lambda w: (max(w), w)):
            if max(v) == radius:
                yield v

    for radius in range(1, bound + 1):
        for v in vectors(radius):
            if is_ample(v, fan, table):
                return divisor(v, fan)
    raise ValueError("no small ample divisor found")


def _solve_vertex(n1, n2, a1: Fraction, a2: Fraction) -> tuple[Fraction, Fraction]:
    # <m, n1> = -a1, <m, n2> = -a2 for a unimodular pair
    det = n1[0] * n2[1] - n1[1] * n2[0]
    x = (-a1 * n2[1] + a2 * n1[1]) / det
    y = (-a2 * n1[0] + a1 * n2[0]) / det
    return x, y


def lattice_point_count(coeffs: Sequence, fan: Fan) -> int:
    """#(P_D cap M) for the polytope P_D = {m : <m, n(rho)> >= -a_rho}.

    Requires D nef; on a smooth complete toric surface the count then equals
    chi(O(D)), giving an oracle independent of Riemann-Roch.
    """
    if fan.rank != 2:
        raise ValueError("lattice point count implemented for surfaces only")
    table = intersection_table(fan)
    a = divisor(coeffs, fan)
    if not is_nef(a, fan, table):
        raise ValueError("divisor is not nef; count would not equal chi")
    vertices = [
        _solve_vertex(fan.rays[c[0]], fan.rays[c[1]], a[c[0]], a[c[1]])
        for c in fan.max_cones
    ]
    import math

    xlo = min(math.floor(v[0]) for v in vertices)
    xhi = max(math.ceil(v[0]) for v in vertices)
    ylo = min(math.floor(v[1]) for v in vertices)
    yhi = max(math.ceil(v[1]) for v in vertices)
    count = 0
    for x in range(xlo, xhi + 1):
        for y in range(ylo, yhi + 1):
            if all(
                x * fan.rays[j][0] + y * fan.rays[j][1] >= -a[j]
                for j in range(fan.n_rays())
            ):
                count += 1
    return count


def chi_line_bundle(coeffs: Sequence, fan: Fan) -> Fraction:
    """chi(O(D)) = deg{exp(D) td}_2 = 1 + D.(D - K)/2 by Riemann-Roch."""
    table = intersection_table(fan)
    d = divisor(coeffs, fan)
    todd, _ = todd_and_canonical(fan)
    return degree(exp_divisor(d, table).mul(todd, table))


def structure_sheaf_hilbert(fan: Fan, ample: Sequence) -> RatPoly:
    """Hilbert polynomial of O_X for the given ample divisor."""
    table = intersection_table(fan)
    h = divisor(ample, fan)
    todd, _ = todd_and_canonical(fan)
    half = todd.d
    return RatPoly.of([Fraction(1), pair(h, half, table), pair(h, h, table) / 2])
