"""Combinatorial sheaf data on smooth toric varieties.

A sheaf is stored per maximal cone as a grid of rational subspaces of k^M
indexed by lattice points of a bounding box, in the character coordinates
given by the dual basis of the cone's rays (a Klyachko-style multi-
filtration).  Evaluation outside the box follows two rules: below the box
in any coordinate the value is zero, above the box a coordinate clamps to
the top (saturation).  Directions in which the sheaf is genuinely bounded
(lower-dimensional support) are encoded by explicit zero slabs at the top
of the box, so the clamp pattern of the grid determines the support.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .fan import APEX, ConeRef, Fan
from .subspace import SubspaceQ

# ---------------------------------------------------------------------------
# box helpers

def box_points(lo: Sequence[int], hi: Sequence[int]) -> Iterable[tuple[int, ...]]:
    return itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))


def _box_index(lo: Sequence[int], hi: Sequence[int], lam: Sequence[int]) -> int:
    idx = 0
    for a, b, x in zip(lo, hi, lam):
        idx = idx * (b - a + 1) + (x - a)
    return idx


def _clamp(lo: Sequence[int], hi: Sequence[int], lam: Sequence[int]):
    """None if lam is below the box in some coordinate, else the clamp."""
    out = []
    for a, b, x in zip(lo, hi, lam):
        if x < a:
            return None
        out.append(min(x, b))
    return tuple(out)


class _Grid:
    """Shared behaviour of subspace-valued and integer-valued grids."""

    cone: ConeRef
    lo: tuple[int, ...]
    hi: tuple[int, ...]

    def _entry(self, lam):
        raise NotImplementedError

    def _zero_value(self):
        raise NotImplementedError

    def _is_zero_value(self, v) -> bool:
        raise NotImplementedError

    def value(self, lam: Sequence[int]):
        c = _clamp(self.lo, self.hi, lam)
        if c is None:
            return self._zero_value()
        return self._entry(c)

    def points(self):
        return box_points(self.lo, self.hi)

    def ndim(self) -> int:
        return len(self.cone)

    def face_values(self, positions: Sequence[int]):
        """Grid over the sub-box of the given free coordinates, all other
        coordinates clamped to the top (the limit toward infinity)."""
        positions = tuple(positions)
        lo = tuple(self.lo[p] for p in positions)
        hi = tuple(self.hi[p] for p in positions)
        vals = []
        for lam in box_points(lo, hi):
            full = list(self.hi)
            for p, x in zip(positions, lam):
                full[p] = x
            vals.append(self._entry(tuple(full)))
        cone = tuple(self.cone[p] for p in positions)
        return cone, lo, hi, tuple(vals)

    def nonzero_points(self):
        return [lam for lam in self.points() if not self._is_zero_value(self._entry(lam))]


@dataclass(frozen=True)
class DimGrid(_Grid):
    """Integer dimension grid over a box, one per maximal cone of a
    characteristic function."""

    cone: ConeRef
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    dims: tuple[int, ...]

    def _entry(self, lam):
        return self.dims[_box_index(self.lo, self.hi, lam)]

    def _zero_value(self):
        return 0

    def _is_zero_value(self, v):
        return v == 0

    def face(self, positions: Sequence[int]) -> "DimGrid":
        cone, lo, hi, vals = self.face_values(positions)
        return DimGrid(cone, lo, hi, vals)

    def shift(self, k: Sequence[int]) -> "DimGrid":
        return DimGrid(
            self.cone,
            tuple(a - b for a, b in zip(self.lo, k)),
            tuple(a - b for a, b in zip(self.hi, k)),
            self.dims,
        )

    def trim(self) -> "DimGrid":
        return _trim_grid(self, DimGrid, self.dims)


@dataclass(frozen=True)
class CornerFamily(_Grid):
    """Subspace grid over a box for one cone; the maps along each axis are
    the inclusions (torsion-free kinds) or drop to zero where the support
    ends (pure kinds)."""

    cone: ConeRef
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    values: tuple[SubspaceQ, ...]
    ambient: int

    def _entry(self, lam):
        return self.values[_box_index(self.lo, self.hi, lam)]

    def _zero_value(self):
        return SubspaceQ.zero(self.ambient)

    def _is_zero_value(self, v):
        return v.is_zero()

    def face(self, positions: Sequence[int]) -> "CornerFamily":
        cone, lo, hi, vals = self.face_values(positions)
        return CornerFamily(cone, lo, hi, vals, self.ambient)

    def shift(self, k: Sequence[int]) -> "CornerFamily":
        return CornerFamily(
            self.cone,
            tuple(a - b for a, b in zip(self.lo, k)),
            tuple(a - b for a, b in zip(self.hi, k)),
            self.values,
            self.ambient,
        )

    def dims(self) -> DimGrid:
        return DimGrid(self.cone, self.lo, self.hi, tuple(v.dim for v in self.values))

    def map_values(self, f) -> "CornerFamily":
        return CornerFamily(self.cone, self.lo, self.hi, tuple(f(v) for v in self.values), self.ambient)

    def with_value(self, lam: Sequence[int], v: SubspaceQ) -> "CornerFamily":
        idx = _box_index(self.lo, self.hi, tuple(lam))
        vals = list(self.values)
        vals[idx] = v
        return CornerFamily(self.cone, self.lo, self.hi, tuple(vals), self.ambient)

    def trim(self) -> "CornerFamily":
        return _trim_grid(self, CornerFamily, self.values, self.ambient)

    def pad_top(self, delta: int) -> "CornerFamily":
        """Extend the box top by delta in every coordinate; the new grid
        points take the clamped values, so evaluation is unchanged."""
        hi = tuple(h + delta for h in self.hi)
        vals = tuple(self.value(lam) for lam in box_points(self.lo, hi))
        return CornerFamily(self.cone, self.lo, hi, vals, self.ambient)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values)


def _trim_grid(grid, cls, flat, *extra):
    """Canonical minimal box: drop all-zero bottom slabs and clamp-redundant
    top slabs; evaluation is unchanged."""
    lo, hi = list(grid.lo), list(grid.hi)

    def slab(coord, at):
        pts = []
        for lam in box_points(
            [l if k != coord else at for k, l in enumerate(lo)],
            [h if k != coord else at for k, h in enumerate(hi)],
        ):
            pts.append(lam)
        return pts

    changed = True
    while changed:
        changed = False
        for k in range(len(lo)):
            while hi[k] > lo[k] and all(
                grid._entry(lam) == grid._entry(tuple(x - (1 if i == k else 0) for i, x in enumerate(lam)))
                for lam in slab(k, hi[k])
            ):
                hi[k] -= 1
                changed = True
            while lo[k] < hi[k] and all(
                grid._is_zero_value(grid._entry(lam)) for lam in slab(k, lo[k])
            ):
                lo[k] += 1
                changed = True
    vals = tuple(grid._entry(lam) for lam in box_points(lo, hi))
    return cls(grid.cone, tuple(lo), tuple(hi), vals, *extra)


# ---------------------------------------------------------------------------
# characteristic functions

@dataclass(frozen=True)
class CharFunction:
    """Per maximal cone, the dimension function of a family."""

    rank: int
    grids: tuple[tuple[int, DimGrid], ...]

    def grid_map(self) -> dict[int, DimGrid]:
        return dict(self.grids)

    def trim(self) -> "CharFunction":
        return CharFunction(self.rank, tuple((i, g.trim()) for i, g in self.grids))

    def canonical(self) -> str:
        doc = {
            "rank": self.rank,
            "cones": [
                {
                    "index": i,
                    "cone": list(g.cone),
                    "lo": list(g.lo),
                    "hi": list(g.hi),
                    "dims": list(g.dims),
                }
                for i, g in sorted(self.grids)
            ],
        }
        return json.dumps(doc, sort_keys=True)


# ---------------------------------------------------------------------------
# ray filtrations and families

@dataclass(frozen=True)
class RayFiltration:
    """Increasing filtration along one ray: jumps (lambda, subspace) with
    strictly increasing lambdas and strictly increasing subspaces, the last
    one the full space."""

    ray: int
    jumps: tuple[tuple[int, SubspaceQ], ...]

    def __post_init__(self):
        if not self.jumps:
            raise ValueError(f"ray {self.ray}: empty filtration")
        amb = self.jumps[0][1].ambient
        prev = None
        for lam, v in self.jumps:
            if v.ambient != amb:
                raise ValueError(f"ray {self.ray}: mixed ambient dimensions")
            if prev is not None:
                if lam <= prev[0]:
                    raise ValueError(f"ray {self.ray}: jump positions not increasing")
                if not (v.contains(prev[1]) and v.dim > prev[1].dim):
                    raise ValueError(f"ray {self.ray}: jumps not strictly increasing")
            prev = (lam, v)
        if not self.jumps[-1][1].is_full():
            raise ValueError(f"ray {self.ray}: filtration never reaches the full space")

    @property
    def ambient(self) -> int:
        return self.jumps[0][1].ambient

    @property
    def first(self) -> int:
        return self.jumps[0][0]

    @property
    def last(self) -> int:
        return self.jumps[-1][0]

    def value(self, lam: int) -> SubspaceQ:
        out = SubspaceQ.zero(self.ambient)
        for pos, v in self.jumps:
            if pos <= lam:
                out = v
            else:
                break
        return out


KIND_TORSION_FREE = "torsion-free"
KIND_REFLEXIVE = "reflexive"
KIND_PURE = "pure"


@dataclass(frozen=True)
class DeltaFamily:
    """Glued corner families over the maximal cones of a fan."""

    kind: str
    rank: int
    corners: tuple[tuple[int, CornerFamily], ...]
    support: tuple[ConeRef, ...] = (APEX,)

    def corner_map(self) -> dict[int, CornerFamily]:
        return dict(self.corners)

    def corner(self, i: int) -> CornerFamily:
        return self.corner_map()[i]

    def map_corners(self, f) -> "DeltaFamily":
        return DeltaFamily(self.kind, self.rank, tuple((i, f(c)) for i, c in self.corners), self.support)


def reflexive_from_filtrations(filts: Sequence[RayFiltration], fan: Fan) -> DeltaFamily:
    """Build the family whose corner values are the intersections of the ray
    filtration values; this is the subspace grid of a reflexive sheaf."""
    if len(filts) != fan.n_rays():
        raise ValueError(f"need one filtration per ray ({fan.n_rays()}), got {len(filts)}")
    by_ray = {f.ray: f for f in filts}
    if set(by_ray) != set(range(fan.n_rays())):
        raise ValueError("filtration ray indices must be 0..N-1, one each")
    ambients = {f.ambient for f in filts}
    if len(ambients) != 1:
        raise ValueError(f"ambient-dimension mismatch across filtrations: {sorted(ambients)}")
    m = ambients.pop()
    corners = []
    for i, mc in enumerate(fan.max_cones):
        fs = [by_ray[j] for j in mc]
        lo = tuple(f.first for f in fs)
        hi = tuple(f.last for f in fs)
        vals = []
        for lam in box_points(lo, hi):
            v = SubspaceQ.full(m)
            for f, x in zip(fs, lam):
                v = v.intersect(f.value(x))
            vals.append(v)
        corners.append((i, CornerFamily(mc, lo, hi, tuple(vals), m)))
    return DeltaFamily(KIND_REFLEXIVE, m, tuple(corners))


# ---------------------------------------------------------------------------
# validation

def _gluing_report(fan: Fan, grids: dict[int, _Grid]) -> list[str]:
    report = []
    idxs = sorted(grids)
    for a in range(len(idxs)):
        for b in range(a + 1, len(idxs)):
            ia, ib = idxs[a], idxs[b]
            ga, gb = grids[ia], grids[ib]
            common = sorted(set(ga.cone) & set(gb.cone))
            pa = [ga.cone.index(j) for j in common]
            pb = [gb.cone.index(j) for j in common]
            ranges = []
            for qa, qb in zip(pa, pb):
                lo = min(ga.lo[qa], gb.lo[qb]) - 1
                hi = max(ga.hi[qa], gb.hi[qb])
                ranges.append(range(lo, hi + 1))
            for lam in itertools.product(*ranges):
                full_a = list(ga.hi)
                full_b = list(gb.hi)
                for qa, x in zip(pa, lam):
                    full_a[qa] = x
                for qb, x in zip(pb, lam):
                    full_b[qb] = x
                if ga.value(full_a) != gb.value(full_b):
                    report.append(
                        f"gluing mismatch between cones {ia} and {ib} at "
                        f"common-ray values {dict(zip(common, lam))}"
                    )
                    break
    return report


def validate_torsion_free(fam: DeltaFamily, fan: Fan) -> list[str]:
    """Empty report iff the family is a valid framed torsion-free family:
    monotone, glued, and saturating to the full space on every cone."""
    report: list[str] = []
    cmap = fam.corner_map()
    if set(cmap) != set(range(len(fan.max_cones))):
        report.append("torsion-free family must carry data on every maximal cone")
        return report
    for i, grid in sorted(cmap.items()):
        if grid.cone != fan.max_cones[i]:
            report.append(f"cone {i}: grid labelled with rays {grid.cone} != {fan.max_cones[i]}")
            return report
        if grid.ambient != fam.rank:
            report.append(f"cone {i}: ambient {grid.ambient} != rank {fam.rank}")
        if any(a > b for a, b in zip(grid.lo, grid.hi)):
            report.append(f"cone {i}: empty box {grid.lo}..{grid.hi}")
            continue
        for lam in grid.points():
            v = grid._entry(lam)
            for k in range(grid.ndim()):
                nxt = list(lam)
                nxt[k] += 1
                w = grid.value(nxt)
                if not w.contains(v):
                    report.append(f"cone {i}: not monotone at {lam} direction {k}")
        if not grid._entry(grid.hi).is_full():
            report.append(f"cone {i}: value at the box top is not the full space")
    report.extend(_gluing_report(fan, cmap))
    return report


def is_reflexive(fam: DeltaFamily, fan: Fan) -> bool:
    """True iff every corner value is the intersection of its axis limits."""
    bad = validate_torsion_free(fam, fan)
    if bad:
        raise ValueError("invalid family: " + "; ".join(bad[:3]))
    for _, grid in fam.corners:
        axis = []
        for k in range(grid.ndim()):
            vals = {}
            for x in range(grid.lo[k], grid.hi[k] + 1):
                full = list(grid.hi)
                full[k] = x
                vals[x] = grid._entry(tuple(full))
            axis.append(vals)
        for lam in grid.points():
            expect = SubspaceQ.full(grid.ambient)
            for k, x in enumerate(lam):
                expect = expect.intersect(axis[k][x])
            if grid._entry(lam) != expect:
                return False
    return True


def detect_support(corner: CornerFamily) -> set[ConeRef]:
    """Support cones read off from the clamp pattern: the minimal coordinate
    sets S such that the family survives to infinity outside S."""
    if corner.is_zero():
        raise ValueError("zero family has no support")
    r = corner.ndim()
    minimal: list[tuple[int, ...]] = []
    for size in range(r + 1):
        for T in itertools.combinations(range(r), size):
            if any(set(m) <= set(T) for m in minimal):
                continue
            _, lo, hi, vals = corner.face_values(T)
            if any(not v.is_zero() for v in vals):
                minimal.append(T)
    return {tuple(sorted(corner.cone[p] for p in T)) for T in minimal}


def _pure_cone_report(i: int, grid: CornerFamily, patterns: list[tuple[int, ...]], s: int) -> list[str]:
    report: list[str] = []
    detected = detect_support(grid) if not grid.is_zero() else set()
    expected = {tuple(sorted(grid.cone[p] for p in T)) for T in patterns}
    if detected != expected:
        report.append(
            f"cone {i}: support pattern {sorted(detected)} does not match declared {sorted(expected)}"
        )
    # monotone or drop to zero
    for lam in grid.points():
        v = grid._entry(lam)
        for k in range(grid.ndim()):
            nxt = list(lam)
            nxt[k] += 1
            w = grid.value(nxt)
            if not w.is_zero() and not w.contains(v):
                report.append(f"cone {i}: value at {lam} does not include into direction {k}")
    bounded = sorted(set(p for T in patterns for p in T))
    if not bounded:
        return report
    # per-coordinate bounds inferred from the top regions
    c_bound: dict[int, int] = {}
    for T in patterns:
        _, lo, hi, vals = grid.face_values(T)
        for pos, p in enumerate(T):
            best = None
            for lam, v in zip(box_points(lo, hi), vals):
                if not v.is_zero():
                    best = lam[pos] if best is None else max(best, lam[pos])
            if best is not None:
                c_bound[p] = max(c_bound.get(p, best), best)
    def in_region(lam):
        return any(all(lam[p] <= c_bound.get(p, lam[p]) for p in T) for T in patterns)

    for lam in grid.points():
        v = grid._entry(lam)
        if v.is_zero():
            continue
        if not in_region(lam):
            report.append(f"cone {i}: nonzero value outside the support region at {lam}")
            continue
        for k in range(grid.ndim()):
            nxt = list(lam)
            nxt[k] += 1
            if grid.value(nxt).is_zero() and in_region(nxt):
                report.append(f"cone {i}: value drops to zero inside the region at {lam} direction {k}")
        # injectivity into the next regions up (the boundary map check)
        iset = [p for p in bounded if p in c_bound and lam[p] <= c_bound[p]]
        if len(iset) >= s + 1:
            for J in itertools.combinations(iset, s + 1):
                ok = False
                for j in J:
                    walk = list(lam)
                    alive = True
                    while walk[j] <= c_bound[j]:
                        walk[j] += 1
                        if grid.value(walk).is_zero():
                            alive = False
                            break
                    if alive:
                        ok = True
                        break
                if not ok:
                    report.append(
                        f"cone {i}: boundary map not injective at {lam} for coordinates {J}"
                    )
    return report


def validate_pure(fam: DeltaFamily, fan: Fan) -> list[str]:
    """Validate a pure family with declared support cones of equal dimension."""
    report: list[str] = []
    if not fam.support:
        return ["pure family with empty support"]
    dims = {len(t) for t in fam.support}
    if len(dims) != 1:
        return [f"support cones of mixed dimensions {sorted(dims)}"]
    for t in fam.support:
        if not fan.is_cone(t):
            return [f"declared support {list(t)} is not a cone of the fan"]
    s = dims.pop()
    cmap = fam.corner_map()
    if s == 0:
        # support is the whole variety; the conditions collapse to the
        # torsion-free ones with an arbitrary saturation space
        for i, grid in sorted(cmap.items()):
            for lam in grid.points():
                v = grid._entry(lam)
                for k in range(grid.ndim()):
                    nxt = list(lam)
                    nxt[k] += 1
                    if not grid.value(nxt).contains(v):
                        report.append(f"cone {i}: not monotone at {lam} direction {k}")
            if grid._entry(grid.hi).is_zero():
                report.append(f"cone {i}: zero limit space")
        report.extend(_gluing_report(fan, cmap))
        return report
    carrying = {
        i
        for i, mc in enumerate(fan.max_cones)
        if any(set(t) <= set(mc) for t in fam.support)
    }
    if set(cmap) != carrying:
        report.append(
            f"data on cones {sorted(cmap)} but the support star is {sorted(carrying)}"
        )
        return report
    for i in sorted(carrying):
        grid = cmap[i]
        mc = fan.max_cones[i]
        patterns = [
            tuple(sorted(mc.index(j) for j in t))
            for t in fam.support
            if set(t) <= set(mc)
        ]
        report.extend(_pure_cone_report(i, grid, patterns, s))
    report.extend(_gluing_report(fan, cmap))
    return report


def validate_family(fam: DeltaFamily, fan: Fan) -> list[str]:
    if fam.kind == KIND_PURE:
        return validate_pure(fam, fan)
    report = validate_torsion_free(fam, fan)
    if not report and fam.kind == KIND_REFLEXIVE and not is_reflexive(fam, fan):
        report.append("declared reflexive but some corner value is smaller than its axis limits")
    return report


# ---------------------------------------------------------------------------
# restriction, twisting, characteristic function, gauge

def restrict_to_face(fam: DeltaFamily, nu: ConeRef, fan: Fan) -> CornerFamily:
    """The family on the open chart of nu: finite coordinates along the rays
    of nu, all other coordinates sent to infinity (clamped)."""
    nu = tuple(sorted(nu))
    if not fan.is_cone(nu):
        raise ValueError(f"{list(nu)} is not a cone of the fan")
    cmap = fam.corner_map()
    for i in sorted(cmap):
        mc = fan.max_cones[i]
        if set(nu) <= set(mc):
            positions = [mc.index(j) for j in nu]
            return cmap[i].face(positions)
    return CornerFamily(nu, (0,) * len(nu), (0,) * len(nu),
                        (SubspaceQ.zero(fam.rank),), fam.rank)


def cone_shift(kvec: Sequence[int], cone: ConeRef) -> tuple[int, ...]:
    return tuple(int(kvec[j]) for j in cone)


def tensor_line_bundle(fam: DeltaFamily, kvec: Sequence[int]) -> DeltaFamily:
    """Twist by the equivariant line bundle with ray integers kvec: each
    corner grid shifts by the per-cone components of kvec."""
    corners = tuple(
        (i, grid.shift(cone_shift(kvec, grid.cone))) for i, grid in fam.corners
    )
    return DeltaFamily(fam.kind, fam.rank, corners, fam.support)


def tensor_char(chi: CharFunction, kvec: Sequence[int]) -> CharFunction:
    return CharFunction(
        chi.rank,
        tuple((i, g.shift(cone_shift(kvec, g.cone))) for i, g in chi.grids),
    )


def characteristic_function(fam: DeltaFamily) -> CharFunction:
    return CharFunction(fam.rank, tuple((i, grid.dims()) for i, grid in fam.corners))


def _integer_solve(rows: Sequence[Sequence[int]], rhs: Sequence[int]) -> tuple[int, ...]:
    """Solve rows * u = rhs for a unimodular integer matrix."""
    n = len(rows)
    aug = [[Fraction(rows[i][j]) for j in range(n)] + [Fraction(rhs[i])] for i in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = Fraction(1) / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[col])]
    out = []
    for r in range(n):
        x = aug[r][n]
        if x.denominator != 1:
            raise ValueError("non-integral solution; cone is not unimodular")
        out.append(int(x))
    return tuple(out)


def gauge_fix(x: DeltaFamily | CharFunction, fan: Fan):
    """Normalize by the unique trivial-class line-bundle twist that makes the
    maximal lower bounds on the designated cone all zero.

    The designated cone is the lowest-index maximal cone carrying nonzero
    data.  Returns (fixed, kvec) where kvec is the ray vector of the twist
    applied (a relation vector, so the divisor class is unchanged).
    """
    if isinstance(x, CharFunction):
        grids = x.grid_map()
        nonzero = lambda g: any(d != 0 for d in g.dims)
    else:
        grids = x.corner_map()
        nonzero = lambda g: not g.is_zero()
    designated = None
    for i in sorted(grids):
        if nonzero(grids[i]):
            designated = i
            break
    if designated is None:
        raise ValueError("family is zero on every cone; nothing to gauge")
    grid = grids[designated]
    bounds = []
    for k in range(grid.ndim()):
        vals = [lam[k] for lam in grid.nonzero_points()]
        bounds.append(min(vals))
    rays = [fan.rays[j] for j in grid.cone]
    u = _integer_solve(rays, bounds)
    kvec = tuple(
        sum(ui * nj for ui, nj in zip(u, fan.rays[j])) for j in range(fan.n_rays())
    )
    if isinstance(x, CharFunction):
        return tensor_char(x, kvec).trim(), kvec
    return tensor_line_bundle(x, kvec), kvec


def intersect_with_subspace(fam: DeltaFamily, w: SubspaceQ) -> DeltaFamily:
    """The subfamily with every corner value intersected with w."""
    if w.ambient != fam.rank:
        raise ValueError("subspace ambient does not match the family rank")
    return fam.map_corners(lambda g: g.map_values(lambda v: v.intersect(w)))


# ---------------------------------------------------------------------------
# serialization

def _grid_jumps(grid: CornerFamily) -> list[dict]:
    """Minimal explicit entries: a point is written iff the join of the
    already-written entries below it does not reproduce the value."""
    entries: list[tuple[tuple[int, ...], SubspaceQ]] = []
    for lam in grid.points():
        rec = SubspaceQ.zero(grid.ambient)
        for mu, v in entries:
            if all(a <= b for a, b in zip(mu, lam)):
                rec = rec.sum(v)
        actual = grid._entry(lam)
        if rec != actual:
            entries.append((lam, actual))
    return [{"at": list(lam), "basis": v.basis_str()} for lam, v in entries]


def family_to_json(fam: DeltaFamily) -> str:
    doc = {
        "kind": fam.kind,
        "rank": fam.rank,
        "support": [list(t) for t in fam.support],
        "cones": [
            {
                "index": i,
                "cone": list(g.cone),
                "lo": list(g.lo),
                "hi": list(g.hi),
                "jumps": _grid_jumps(g),
            }
            for i, g in fam.corners
        ],
    }
    return json.dumps(doc, sort_keys=True)


def family_from_json(text: str) -> DeltaFamily:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"family file is not valid JSON: {e}") from e
    for field in ("kind", "rank", "cones"):
        if field not in doc:
            raise ValueError(f"family file missing field '{field}'")
    m = int(doc["rank"])
    corners = []
    for entry in doc["cones"]:
        for field in ("index", "cone", "lo", "hi", "jumps"):
            if field not in entry:
                raise ValueError(f"family cone entry missing field '{field}'")
        cone = tuple(int(x) for x in entry["cone"])
        lo = tuple(int(x) for x in entry["lo"])
        hi = tuple(int(x) for x in entry["hi"])
        explicit: dict[tuple[int, ...], SubspaceQ] = {}
        for j in entry["jumps"]:
            at = tuple(int(x) for x in j["at"])
            rows = [[Fraction(s) for s in row] for row in j["basis"]]
            explicit[at] = SubspaceQ.span(rows, m)
        vals = []
        for lam in box_points(lo, hi):
            if lam in explicit:
                vals.append(explicit[lam])
            else:
                rec = SubspaceQ.zero(m)
                for mu, v in explicit.items():
                    if all(a <= b for a, b in zip(mu, lam)):
                        rec = rec.sum(v)
                vals.append(rec)
        corners.append((int(entry["index"]), CornerFamily(cone, lo, hi, tuple(vals), m)))
    support = tuple(tuple(int(x) for x in t) for t in doc.get("support", [[]]))
    return DeltaFamily(str(doc["kind"]), m, tuple(corners), support)
