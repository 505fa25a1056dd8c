"""Smooth complete toric fans and their combinatorics.

A fan is stored as an ordered list of primitive ray generators plus the
maximal cones as ray-index sets.  Since every cone here is smooth (hence
simplicial), the full face lattice is derived on demand as the set of
subsets of maximal cones.  For surfaces (rank 2) the ray order is the
counterclockwise cyclic order and completeness is checked exactly via the
angular cover; in higher rank the facet-pairing criterion is used.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import gcd
from typing import Iterable, Sequence

ConeRef = tuple[int, ...]
APEX: ConeRef = ()


def _primitive(v: Sequence[int]) -> bool:
    g = 0
    for x in v:
        g = gcd(g, abs(x))
    return g == 1


def _det(rows: Sequence[Sequence[int]]) -> int:
    n = len(rows)
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j in range(n):
        minor = [[rows[i][k] for k in range(n) if k != j] for i in range(1, n)]
        total += (-1) ** j * rows[0][j] * _det(minor)
    return total


def _cross2(u: Sequence[int], v: Sequence[int]) -> int:
    return u[0] * v[1] - u[1] * v[0]


def _angle_class(v: Sequence[int]) -> int:
    # 0 for the closed upper half starting at the positive x-axis, 1 below
    if v[1] > 0 or (v[1] == 0 and v[0] > 0):
        return 0
    return 1


def _ccw_before(u: Sequence[int], v: Sequence[int]) -> bool:
    """Strict angular order starting at direction (1, 0), going ccw."""
    hu, hv = _angle_class(u), _angle_class(v)
    if hu != hv:
        return hu < hv
    return _cross2(u, v) > 0


@dataclass(frozen=True)
class Fan:
    rank: int
    rays: tuple[tuple[int, ...], ...]
    max_cones: tuple[ConeRef, ...]

    @staticmethod
    def make(rank: int, rays: Iterable[Sequence[int]], max_cones: Iterable[Sequence[int]]) -> "Fan":
        rs = tuple(tuple(int(x) for x in r) for r in rays)
        mc = tuple(tuple(sorted(int(i) for i in c)) for c in max_cones)
        return Fan(rank, rs, mc)

    def n_rays(self) -> int:
        return len(self.rays)

    def cones(self) -> list[ConeRef]:
        """All cones of the fan (as sorted ray-index tuples), apex included."""
        seen: set[ConeRef] = set()
        for mc in self.max_cones:
            m = len(mc)
            for mask in range(1 << m):
                face = tuple(mc[i] for i in range(m) if mask >> i & 1)
                seen.add(face)
        return sorted(seen, key=lambda c: (len(c), c))

    def is_cone(self, ref: ConeRef) -> bool:
        s = set(ref)
        return any(s <= set(mc) for mc in self.max_cones)

    def cone_rays(self, ref: ConeRef) -> list[tuple[int, ...]]:
        return [self.rays[i] for i in ref]


def validate_fan(fan: Fan) -> list[str]:
    """Check the smooth-complete-fan invariants; empty report means valid."""
    report: list[str] = []
    r, n = fan.rank, fan.n_rays()
    if r < 1:
        return [f"rank {r} not positive"]
    for i, ray in enumerate(fan.rays):
        if len(ray) != r:
            report.append(f"ray {i} has length {len(ray)} != rank {r}")
            return report
        if all(x == 0 for x in ray):
            report.append(f"ray {i} is zero")
        elif not _primitive(ray):
            report.append(f"ray {i} not primitive: {list(ray)}")
    if len(set(fan.rays)) != n:
        report.append("duplicate rays")
    used: set[int] = set()
    for ci, mc in enumerate(fan.max_cones):
        if len(mc) != r or len(set(mc)) != r:
            report.append(f"maximal cone {ci} does not have {r} distinct rays: {list(mc)}")
            continue
        if any(i < 0 or i >= n for i in mc):
            report.append(f"maximal cone {ci} has out-of-range ray index")
            continue
        used.update(mc)
        d = _det([fan.rays[i] for i in mc])
        if abs(d) != 1:
            report.append(f"maximal cone {ci} not smooth: |det| = {abs(d)}")
    if report:
        return report
    if len(set(fan.max_cones)) != len(fan.max_cones):
        report.append("duplicate maximal cones")
    missing = set(range(n)) - used
    if missing:
        report.append(f"rays not contained in any maximal cone: {sorted(missing)}")
    if report:
        return report

    if r == 2:
        report.extend(_validate_complete_surface(fan))
    else:
        report.extend(_validate_complete_general(fan))
    return report


def _validate_complete_surface(fan: Fan) -> list[str]:
    report: list[str] = []
    n = fan.n_rays()
    if n < 3:
        return [f"only {n} rays; a complete surface fan needs at least 3"]
    descents = 0
    for i in range(n):
        u, v = fan.rays[i], fan.rays[(i + 1) % n]
        if _cross2(u, v) <= 0:
            report.append(
                f"rays {i},{(i + 1) % n} not a counterclockwise step (cross = {_cross2(u, v)})"
            )
        if not _ccw_before(u, v):
            descents += 1
    if not report and descents != 1:
        report.append("rays not in a single counterclockwise cycle: not complete")
    expected = {tuple(sorted((i, (i + 1) % n))) for i in range(n)}
    got = set(fan.max_cones)
    for c in sorted(expected - got):
        report.append(f"missing maximal cone {list(c)}: not complete")
    for c in sorted(got - expected):
        report.append(f"maximal cone {list(c)} is not a pair of angularly adjacent rays")
    return report


def _validate_complete_general(fan: Fan) -> list[str]:
    # facet pairing plus star connectivity; the geometric cover test is
    # implemented only for surfaces.
    report: list[str] = []
    facets: dict[ConeRef, list[int]] = {}
    for ci, mc in enumerate(fan.max_cones):
        for skip in range(len(mc)):
            f = tuple(x for k, x in enumerate(mc) if k != skip)
            facets.setdefault(f, []).append(ci)
    for f, owners in sorted(facets.items()):
        if len(owners) != 2:
            report.append(
                f"facet {list(f)} belongs to {len(owners)} maximal cones (needs 2): not complete"
            )
    if report:
        return report
    # stars must be connected through shared facets
    adj: dict[int, set[int]] = {i: set() for i in range(len(fan.max_cones))}
    for owners in facets.values():
        a, b = owners
        adj[a].add(b)
        adj[b].add(a)
    seen = {0}
    stack = [0]
    while stack:
        for j in adj[stack.pop()]:
            if j not in seen:
                seen.add(j)
                stack.append(j)
    if len(seen) != len(fan.max_cones):
        report.append("maximal cones not connected through facets: not complete")
    return report


def star(fan: Fan, tau: ConeRef) -> list[ConeRef]:
    """All cones having tau as a face, tau included."""
    tau = tuple(sorted(tau))
    if not fan.is_cone(tau):
        raise ValueError(f"{list(tau)} is not a cone of the fan")
    s = set(tau)
    return [c for c in fan.cones() if s <= set(c)]


def cone_count_identity(fan: Fan, tau: ConeRef) -> int:
    """Signed count of cones in the star of tau, by dimension.

    For a complete simplicial fan the value is 1 for every tau.
    """
    if validate_fan(fan):
        raise ValueError("fan is not a valid complete fan")
    tau = tuple(sorted(tau))
    s = len(tau)
    counts: dict[int, int] = {}
    for c in star(fan, tau):
        counts[len(c)] = counts.get(len(c), 0) + 1
    total = 0
    for a in range(fan.rank - s + 1):
        total += (-1) ** a * counts.get(s + a, 0)
    return (-1) ** (fan.rank - s) * total


def euler_characteristic(fan: Fan) -> int:
    """Topological Euler characteristic of the toric variety: the number of
    maximal cones of a smooth complete fan."""
    if validate_fan(fan):
        raise ValueError("fan is not a valid complete fan")
    return len(fan.max_cones)


# --- the corpus surfaces -------------------------------------------------

def projective_plane() -> Fan:
    return Fan.make(2, [(1, 0), (0, 1), (-1, -1)], [(0, 1), (1, 2), (2, 0)])


def p1_x_p1() -> Fan:
    return Fan.make(
        2, [(1, 0), (0, 1), (-1, 0), (0, -1)], [(0, 1), (1, 2), (2, 3), (3, 0)]
    )


def hirzebruch(a: int) -> Fan:
    return Fan.make(
        2, [(1, 0), (0, 1), (-1, a), (0, -1)], [(0, 1), (1, 2), (2, 3), (3, 0)]
    )



# --- serialization -------------------------------------------------------

def fan_to_json(fan: Fan) -> str:
    doc = {
        "rank": fan.rank,
        "rays": [list(r) for r in fan.rays],
        "max_cones": [list(c) for c in fan.max_cones],
    }
    return json.dumps(doc, sort_keys=True)


def fan_from_json(text: str) -> Fan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ValueError(f"fan file is not valid JSON: {e}") from e
    for field in ("rank", "rays", "max_cones"):
        if field not in doc:
            raise ValueError(f"fan file missing field '{field}'")
    return Fan.make(doc["rank"], doc["rays"], doc["max_cones"])
