"""Stability tests and GIT weight systems for torsion-free families.

Slope stability is decided by the flag inequality: for a subspace W,

    sum_{j,k} gap_j(k) deg(D_j) dim(p_j(k) cap W)
        <=  (dim W / M) sum_{j,k} gap_j(k) deg(D_j) dim p_j(k),

with the gap data read off the ray filtrations and deg(D_j) = H.D_j.
Gieseker stability compares reduced Hilbert polynomials of the intersected
subfamilies for t >> 0.  In rank <= 2 the distinguished subspaces (corner
values closed under sum and intersection) together with one generic line
exhaust all possible violations, so those verdicts are exact; in higher
rank the verdict is over the distinguished set only and flagged as such.

GIT stability is the weighted dimension inequality over the same test set;
weight systems come either from the flag gaps (slope matching, with an
R-scaling when non-flag Grassmannian factors are present) or from the face
weight polynomials evaluated at an adaptively certified integer R
(Gieseker matching).
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .chern import as_char, hilbert_polynomial, restrict_char
from .family import (
    CharFunction,
    DeltaFamily,
    KIND_PURE,
    box_points,
    characteristic_function,
    intersect_with_subspace,
    is_reflexive,
    restrict_to_face,
)
from .fan import ConeRef, Fan
from .intersect import IntersectionTable, divisor, intersection_table, is_ample, pair
from .polynomials import RatPoly, compare_for_large_t
from .subspace import SubspaceQ

STABLE = "stable"
SEMISTABLE = "strictly-semistable"
UNSTABLE = "unstable"


@dataclass(frozen=True)
class StabilityVerdict:
    test: str
    verdict: str
    witness: SubspaceQ | None
    margin: object  # Fraction for mu/git, RatPoly for gieseker; None if no test subspaces
    exhaustive: bool
    note: str | None = None


# ---------------------------------------------------------------------------
# flag data and test subspaces

@dataclass(frozen=True)
class RayFlags:
    ray: int
    base: int                       # lowest jump position A_j
    gaps: tuple[int, ...]           # gap lengths at dimensions 1..M-1
    flags: tuple[SubspaceQ | None, ...]  # the flag subspaces where gaps > 0
    positions: tuple[int | None, ...]    # a lambda at which each flag sits


@dataclass(frozen=True)
class FlagData:
    rank: int
    rays: tuple[RayFlags, ...]


def extract_flag_data(fam: DeltaFamily, fan: Fan) -> FlagData:
    m = fam.rank
    out = []
    for j in range(fan.n_rays()):
        grid = restrict_to_face(fam, (j,), fan)
        lo, hi = grid.lo[0], grid.hi[0]
        base = None
        gaps = [0] * (m - 1)
        flags: list[SubspaceQ | None] = [None] * (m - 1)
        pos: list[int | None] = [None] * (m - 1)
        prev = 0
        for lam in range(lo, hi + 1):
            v = grid.value((lam,))
            if v.dim < prev:
                raise ValueError(f"ray {j}: filtration dimensions decrease at {lam}")
            prev = v.dim
            if v.dim > 0 and base is None:
                base = lam
            if 0 < v.dim < m:
                gaps[v.dim - 1] += 1
                flags[v.dim - 1] = v
                if pos[v.dim - 1] is None:
                    pos[v.dim - 1] = lam
        if prev != m:
            raise ValueError(f"ray {j}: filtration does not saturate to the full space")
        if base is None:
            base = hi
        out.append(RayFlags(j, base, tuple(gaps), tuple(flags), tuple(pos)))
    return FlagData(m, tuple(out))


def distinguished_subspaces(fam: DeltaFamily) -> list[SubspaceQ]:
    """Corner and limit subspaces closed under pairwise sum and intersection,
    excluding 0 and the full space."""
    m = fam.rank
    pool: set[SubspaceQ] = set()
    for _, grid in fam.corners:
        for v in grid.values:
            if 0 < v.dim < m:
                pool.add(v)
    changed = True
    while changed:
        changed = False
        for a, b in itertools.combinations(sorted(pool, key=_subspace_key), 2):
            for c in (a.intersect(b), a.sum(b)):
                if 0 < c.dim < m and c not in pool:
                    pool.add(c)
                    changed = True
    return sorted(pool, key=_subspace_key)


def _subspace_key(v: SubspaceQ):
    return (v.dim, tuple(tuple(str(x) for x in row) for row in v.rows))


def _line(ambient: int, vec: Sequence[int]) -> SubspaceQ:
    return SubspaceQ.span([vec], ambient)


def generic_test_subspaces(fam: DeltaFamily, avoid: Sequence[SubspaceQ]) -> list[SubspaceQ]:
    """One generic proper subspace per dimension, for rank <= 2: a line whose
    intersection with every corner value has the generic dimension."""
    m = fam.rank
    if m != 2:
        return []
    avoid_set = set(avoid)
    candidates = [_line(2, (0, 1))] + [_line(2, (1, t)) for t in range(len(avoid_set) + 2)]
    values = [v for _, g in fam.corners for v in g.values]
    for w in candidates:
        if w in avoid_set:
            continue
        if all(v.intersect(w).dim == max(0, v.dim + 1 - m) for v in values):
            return [w]
    raise RuntimeError("no generic line found")  # pool always suffices


def test_subspaces(fam: DeltaFamily) -> tuple[list[SubspaceQ], bool]:
    """Test set and whether it certifies an exhaustive verdict."""
    ws = distinguished_subspaces(fam)
    if fam.rank <= 2:
        return ws + generic_test_subspaces(fam, ws), True
    return ws, False


# ---------------------------------------------------------------------------
# slope test

def mu_test(fam: DeltaFamily, fan: Fan, ample: Sequence,
            table: IntersectionTable | None = None) -> StabilityVerdict:
    table = table or intersection_table(fan)
    h = divisor(ample, fan)
    if not is_ample(h, fan, table):
        raise ValueError("polarization is not ample")
    m = fam.rank
    flags = extract_flag_data(fam, fan)
    n = fan.n_rays()
    unit = lambda j: tuple(Fraction(1 if i == j else 0) for i in range(n))
    deg = [pair(h, unit(j), table) for j in range(n)]
    total = sum(
        rf.gaps[k] * deg[rf.ray] * (k + 1)
        for rf in flags.rays
        for k in range(m - 1)
    )

    def margin(w: SubspaceQ) -> Fraction:
        lhs = Fraction(0)
        for rf in flags.rays:
            for k in range(m - 1):
                if rf.gaps[k] and rf.flags[k] is not None:
                    lhs += rf.gaps[k] * deg[rf.ray] * rf.flags[k].intersect(w).dim
        return lhs - Fraction(w.dim, m) * total

    ws, exhaustive = test_subspaces(fam)
    note = None
    if not exhaustive:
        note = "distinguished-set verdict (rank >= 3): violations outside the test set are not excluded"
    return _classify("mu", [(w, margin(w)) for w in ws], Fraction(0), exhaustive, note,
                     stable_caveat=_mu_stable_caveat(fam, fan))


def _mu_stable_caveat(fam: DeltaFamily, fan: Fan) -> str | None:
    if fam.kind == KIND_PURE:
        return None
    if is_reflexive(fam, fan):
        return None
    return ("stable verdict certified against equivariant subobjects only "
            "(non-reflexive torsion-free input)")


def _classify(test, margins, zero, exhaustive, note, stable_caveat=None) -> StabilityVerdict:
    if not margins:
        full_note = note
        if stable_caveat:
            full_note = stable_caveat if note is None else f"{note}; {stable_caveat}"
        return StabilityVerdict(test, STABLE, None, None, exhaustive, full_note)
    if test == "gieseker":
        sign = lambda mg: compare_for_large_t(mg, RatPoly.zero())
    else:
        sign = lambda mg: (mg > zero) - (mg < zero)
    worst_w, worst = max(margins, key=lambda t: (sign(t[1]), _margin_sort(t[1])))
    s = sign(worst)
    if s > 0:
        return StabilityVerdict(test, UNSTABLE, worst_w, worst, exhaustive, note)
    if s == 0:
        return StabilityVerdict(test, SEMISTABLE, worst_w, worst, exhaustive, note)
    full_note = note
    if stable_caveat:
        full_note = stable_caveat if note is None else f"{note}; {stable_caveat}"
    return StabilityVerdict(test, STABLE, None, worst, exhaustive, full_note)


def _margin_sort(mg):
    if isinstance(mg, RatPoly):
        return tuple(reversed([mg.coeff(i) for i in range(mg.degree + 1)])) or (Fraction(0),)
    return mg


# ---------------------------------------------------------------------------
# Gieseker test

def gieseker_test(fam: DeltaFamily, fan: Fan, ample: Sequence,
                  table: IntersectionTable | None = None) -> StabilityVerdict:
    table = table or intersection_table(fan)
    h = divisor(ample, fan)
    if not is_ample(h, fan, table):
        raise ValueError("polarization is not ample")
    m = fam.rank
    p_e = hilbert_polynomial(fam, fan, h, table).scale(Fraction(1, m))
    ws, exhaustive = test_subspaces(fam)
    margins = []
    for w in ws:
        sub = intersect_with_subspace(fam, w)
        p_w = hilbert_polynomial(sub, fan, h, table).scale(Fraction(1, w.dim))
        margins.append((w, p_w - p_e))
    note = None
    if not exhaustive:
        note = "distinguished-set verdict (rank >= 3): violations outside the test set are not excluded"
    return _classify("gieseker", margins, None, exhaustive, note)


# ---------------------------------------------------------------------------
# weight systems and the GIT test

WeightKey = tuple[ConeRef, tuple[int, ...]]


@dataclass(frozen=True)
class WeightSystem:
    ambient: int
    entries: tuple[tuple[WeightKey, int], ...]

    def __post_init__(self):
        for key, w in self.entries:
            if w <= 0:
                raise ValueError(f"weight at {key} is {w}; ample weight systems are positive")

    def items(self):
        return self.entries


def mu_weights(fam: DeltaFamily, fan: Fan, ample: Sequence,
               table: IntersectionTable | None = None) -> WeightSystem:
    """Flag weights gap_j(k) deg(D_j); zero-gap factors are left out.  With
    non-flag Grassmannian factors present (general torsion-free data) the
    flag weights are scaled by R with sum(n_alpha)/R < 1/M^2 and the extra
    factors get weight 1."""
    if fam.kind == KIND_PURE:
        raise ValueError("no weight constructor is offered for pure kinds")
    table = table or intersection_table(fan)
    h = divisor(ample, fan)
    if not is_ample(h, fan, table):
        raise ValueError("polarization is not ample")
    m = fam.rank
    n = fan.n_rays()
    unit = lambda j: tuple(Fraction(1 if i == j else 0) for i in range(n))
    deg = [pair(h, unit(j), table) for j in range(n)]
    flags = extract_flag_data(fam, fan)
    flag_entries: list[tuple[WeightKey, int]] = []
    for rf in flags.rays:
        for k in range(m - 1):
            if rf.gaps[k]:
                kappa = rf.gaps[k] * deg[rf.ray]
                if kappa.denominator != 1:
                    raise ValueError("non-integral weight; polarization must be integral")
                flag_entries.append((((rf.ray,), (rf.positions[k],)), int(kappa)))
    if not flag_entries:
        raise ValueError("all flag gaps are zero; no slope-stable objects with this shape")
    reflexive = is_reflexive(fam, fan)
    if reflexive:
        return WeightSystem(m, tuple(flag_entries))
    extra_entries: list[tuple[WeightKey, int]] = []
    n_sum = 0
    for i, grid in fam.corners:
        for lam in grid.points():
            v = grid._entry(lam)
            free = sum(1 for k in range(grid.ndim()) if lam[k] < grid.hi[k])
            if 0 < v.dim < m and free >= 2:
                extra_entries.append(((grid.cone, lam), 1))
                n_sum += v.dim
    if not extra_entries:
        return WeightSystem(m, tuple(flag_entries))
    r_scale = m * m * n_sum + 1
    scaled = [(key, w * r_scale) for key, w in flag_entries]
    return WeightSystem(m, tuple(scaled + extra_entries))


def _point_subspace(fam: DeltaFamily, fan: Fan, key: WeightKey) -> SubspaceQ:
    cone, lam = key
    grid = restrict_to_face(fam, cone, fan)
    if len(lam) != grid.ndim():
        raise ValueError(f"weight key {key} does not match the family's shape")
    return grid.value(lam)


def random_subspaces(ambient: int, count: int, rng: random.Random) -> list[SubspaceQ]:
    out = []
    while len(out) < count:
        dim = rng.randrange(1, ambient) if ambient > 1 else 1
        rows = [[rng.randrange(-3, 4) for _ in range(ambient)] for _ in range(dim)]
        v = SubspaceQ.span(rows, ambient)
        if 0 < v.dim < ambient:
            out.append(v)
    return out


def git_test(fam: DeltaFamily, weights: WeightSystem, fan: Fan,
             n_random: int = 0, seed: int = 0) -> StabilityVerdict:
    """Weighted dimension inequality over the distinguished and sampled
    subspaces; properly stable iff strict for every test subspace."""
    m = fam.rank
    if weights.ambient != m:
        raise ValueError(f"weight system ambient {weights.ambient} != family rank {m}")
    points = [(key, w, _point_subspace(fam, fan, key)) for key, w in weights.items()]
    rhs = Fraction(sum(w * p.dim for _, w, p in points), m)

    def margin(wsub: SubspaceQ) -> Fraction:
        lhs = Fraction(
            sum(w * p.intersect(wsub).dim for _, w, p in points), wsub.dim
        )
        return lhs - rhs

    ws, exhaustive = test_subspaces(fam)
    if n_random:
        rng = random.Random(seed)
        ws = ws + random_subspaces(m, n_random, rng)
    note = None if exhaustive else "distinguished-set verdict (rank >= 3)"
    return _classify("git", [(w, margin(w)) for w in ws], Fraction(0), exhaustive, note)


# ---------------------------------------------------------------------------
# face weight polynomials (Gieseker-matching weights)

class LamPoly:
    """Polynomial in the box coordinates with RatPoly-in-t coefficients."""

    def __init__(self, nvars: int, terms: dict[tuple[int, ...], RatPoly]):
        self.nvars = nvars
        self.terms = {e: p for e, p in terms.items() if not p.is_zero()}

    @staticmethod
    def zero(nvars: int) -> "LamPoly":
        return LamPoly(nvars, {})

    def add(self, other: "LamPoly") -> "LamPoly":
        terms = dict(self.terms)
        for e, p in other.terms.items():
            terms[e] = terms.get(e, RatPoly.zero()) + p
        return LamPoly(self.nvars, terms)

    def shifted(self, u: int) -> "LamPoly":
        """f(lambda + e_u), by binomial expansion in coordinate u."""
        from math import comb

        terms: dict[tuple[int, ...], RatPoly] = {}
        for e, p in self.terms.items():
            a = e[u]
            for b in range(a + 1):
                ne = tuple(b if k == u else x for k, x in enumerate(e))
                add = p.scale(comb(a, b))
                terms[ne] = terms.get(ne, RatPoly.zero()) + add
        return LamPoly(self.nvars, terms)

    def diff_sub(self, u: int) -> "LamPoly":
        """f - f(. + e_u), the summation-by-parts coefficient."""
        sh = self.shifted(u)
        terms = dict(self.terms)
        for e, p in sh.terms.items():
            terms[e] = terms.get(e, RatPoly.zero()) - p
        return LamPoly(self.nvars, terms)

    def substitute(self, u: int, value: int) -> "LamPoly":
        terms: dict[tuple[int, ...], RatPoly] = {}
        for e, p in self.terms.items():
            ne = tuple(0 if k == u else x for k, x in enumerate(e))
            add = p.scale(Fraction(value) ** e[u])
            terms[ne] = terms.get(ne, RatPoly.zero()) + add
        return LamPoly(self.nvars, terms)

    def eval(self, point: Sequence[int]) -> RatPoly:
        out = RatPoly.zero()
        for e, p in self.terms.items():
            c = Fraction(1)
            for x, a in zip(point, e):
                c *= Fraction(x) ** a
            out = out + p.scale(c)
        return out


@dataclass(frozen=True)
class XiWeights:
    ambient: int
    entries: tuple[tuple[WeightKey, RatPoly], ...]

    def entry_map(self) -> dict[WeightKey, RatPoly]:
        return dict(self.entries)

    def at(self, r: int) -> WeightSystem:
        vals = []
        for key, poly in self.entries:
            v = poly(r)
            if v.denominator != 1:
                raise ValueError(f"weight polynomial at {key} is not integer-valued at {r}")
            vals.append((key, int(v)))
        return WeightSystem(self.ambient, tuple(vals))

    def all_positive_at(self, r: int) -> bool:
        return all(poly(r) > 0 for _, poly in self.entries)


def _phi_poly(fan: Fan, table: IntersectionTable, ample, cone_rays: ConeRef,
              positions: Sequence[int], mc: ConeRef) -> LamPoly:
    """The Riemann-Roch value deg{exp(-sum lam_u V_u + tH) td}_2 as a
    polynomial in the face coordinates, signed by codimension."""
    n = fan.n_rays()
    unit = lambda j: tuple(Fraction(1 if i == j else 0) for i in range(n))
    h = tuple(Fraction(c) for c in ample)
    ones = tuple(Fraction(1) for _ in range(n))
    sign = (-1) ** (fan.rank - len(positions))
    nv = len(positions)
    terms: dict[tuple[int, ...], RatPoly] = {}
    phs = pair(h, ones, table)
    phh = pair(h, h, table)
    terms[(0,) * nv] = RatPoly.of([Fraction(1), phs / 2, phh / 2])
    rays = [mc[p] for p in positions]
    for u, j in enumerate(rays):
        e = tuple(1 if k == u else 0 for k in range(nv))
        terms[e] = RatPoly.of([-pair(unit(j), ones, table) / 2, -pair(unit(j), h, table)])
    for u in range(nv):
        for v in range(u, nv):
            e = tuple((2 if k == u else 0) if u == v else (1 if k in (u, v) else 0)
                      for k in range(nv))
            coeff = pair(unit(rays[u]), unit(rays[v]), table)
            if u == v:
                coeff /= 2
            terms[e] = terms.get(e, RatPoly.zero()) + RatPoly.of([coeff])
    return LamPoly(nv, {e: p.scale(sign) for e, p in terms.items()})


def xi_weights(chi: CharFunction, fan: Fan, ample: Sequence,
               table: IntersectionTable | None = None) -> XiWeights:
    """Face weight polynomials: for every cone of the fan and every lattice
    point of its cut-off box, a polynomial Xi(t) such that

        sum Xi_{nu,lam}(t) dim E^nu(lam)  =  P_E(t)

    exactly, for every torsion-free family with characteristic function chi.
    """
    if fan.rank != 2:
        raise ValueError("face weights implemented for surfaces only")
    table = table or intersection_table(fan)
    if not is_ample(ample, fan, table):
        raise ValueError("polarization is not ample")
    gmap = chi.grid_map()
    if set(gmap) != set(range(len(fan.max_cones))):
        raise ValueError("characteristic function must cover every maximal cone")
    for i, g in gmap.items():
        if g.value(g.hi) != chi.rank:
            raise ValueError(f"cone {i}: characteristic function does not saturate to the rank")
    entries: dict[WeightKey, RatPoly] = {}
    for nu in fan.cones():
        ambient_i = min(
            i for i, mc in enumerate(fan.max_cones) if set(nu) <= set(mc)
        )
        mc = fan.max_cones[ambient_i]
        grid = gmap[ambient_i]
        positions = [mc.index(j) for j in nu]
        phi = _phi_poly(fan, table, ample, nu, positions, mc)
        cut = [grid.hi[p] + 1 for p in positions]
        low = [grid.lo[p] for p in positions]
        nv = len(positions)
        for mask in range(1 << nv):
            free = [u for u in range(nv) if mask >> u & 1]
            g = phi
            for u in free:
                g = g.diff_sub(u)
            for v in range(nv):
                if v not in free:
                    g = g.substitute(v, cut[v])
            face_cone = tuple(sorted(mc[positions[u]] for u in free))
            ranges = [range(low[u], cut[u]) for u in free]
            for lam in itertools.product(*ranges):
                point = [0] * nv
                for u, x in zip(free, lam):
                    point[u] = x
                val = g.eval(point)
                if val.is_zero():
                    continue
                key = (face_cone, tuple(lam))
                entries[key] = entries.get(key, RatPoly.zero()) + val
    items = tuple(sorted(
        ((k, p) for k, p in entries.items() if not p.is_zero()),
        key=lambda kp: (len(kp[0][0]), kp[0]),
    ))
    return XiWeights(chi.rank, items)


def xi_reconstruct(xi: XiWeights, fam: DeltaFamily, fan: Fan) -> RatPoly:
    """Evaluate sum Xi_(nu,lam)(t) dim E^nu(lam) for a concrete family."""
    chi = as_char(fam)
    out = RatPoly.zero()
    cache: dict[ConeRef, object] = {}
    for (cone, lam), poly in xi.entries:
        if cone not in cache:
            cache[cone] = restrict_char(chi, cone, fan)
        d = cache[cone].value(lam)
        if d:
            out = out + poly.scale(d)
    return out


def choose_r(chi: CharFunction, fan: Fan, ample: Sequence,
             witnesses: Sequence[DeltaFamily], r_start: int = 1, r_max: int = 4000,
             table: IntersectionTable | None = None) -> tuple[int, WeightSystem]:
    """Smallest R >= r_start with all face weights positive at R and the GIT
    verdict matching the Gieseker verdict on every witness family."""
    table = table or intersection_table(fan)
    xi = xi_weights(chi, fan, ample, table)
    targets = [gieseker_test(w, fan, ample, table).verdict for w in witnesses]
    for r in range(r_start, r_max + 1):
        if not xi.all_positive_at(r):
            continue
        ws = xi.at(r)
        if all(
            git_test(w, ws, fan).verdict == t for w, t in zip(witnesses, targets)
        ):
            return r, ws
    raise RuntimeError(f"no certified R found in [{r_start}, {r_max}]")
