import itertools
from collections import Counter

import pytest

from toricsheaves.family import characteristic_function, validate_torsion_free
from toricsheaves.fan import hirzebruch, projective_plane
from toricsheaves.moduli import (
    BoxBoundError,
    IntSeries,
    enumerate_gauge_fixed_chi,
    eta_like_product,
    partition_diagram,
    partitions_of,
    rank1_fixed_point_series,
    rank2_p2_series,
)

RANK2_P2_COEFFS = (0, 1, 9, 48, 203, 729, 2346, 6918, 19062, 49620)


def oracle_partition_count(n):
    """Independent recursive partition counter p(n)."""
    table = {}

    def p(n, k):
        if n == 0:
            return 1
        if k == 0:
            return 0
        if (n, k) not in table:
            table[(n, k)] = p(n, k - 1) + (p(n - k, min(n - k, k)) if n >= k else 0)
        return table[(n, k)]

    return p(n, n)


# --- series -------------------------------------------------------------------

def test_int_series_ops():
    a = IntSeries.of([1, 2, 3], 4)
    b = IntSeries.of([1, -1], 4)
    assert (a * b).coeffs == (1, 1, 1, -3, 0)
    assert (b.inverse() * b).coeffs == (1, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        IntSeries.of([2], 3).inverse()


def test_partition_enumeration_matches_recursion():
    for n in range(9):
        assert sum(1 for _ in partitions_of(n)) == oracle_partition_count(n)


def test_partition_diagram_size():
    for n in range(6):
        for p in partitions_of(n):
            assert len(partition_diagram(p)) == n


def test_rank1_series_examples(p2):
    s = rank1_fixed_point_series(p2, 2)
    assert s.coeffs[1] == 3  # one box at one of 3 fixed points
    assert s.coeffs[2] == 9  # tuples of total size 2 over 3 cones


def test_rank1_series_is_eta_product(corpus):
    for name, fan in corpus.items():
        e = len(fan.max_cones)
        assert (
            rank1_fixed_point_series(fan, 8).coeffs
            == eta_like_product(-e, 8).coeffs
        )


def test_rank1_requires_surface():
    from toricsheaves.fan import Fan

    line = Fan.make(1, [(1,), (-1,)], [(0,), (1,)])
    with pytest.raises(ValueError):
        rank1_fixed_point_series(line, 3)


def test_rank2_p2_series_paper_coefficients():
    assert rank2_p2_series(9).coeffs == RANK2_P2_COEFFS


def test_rank2_p2_series_starts_at_q():
    assert rank2_p2_series(5).coeffs[0] == 0


def test_rank2_series_product_round_trip():
    # series * prod(1-q^k)^6 recovers the double sum part
    order = 12
    s = rank2_p2_series(order)
    back = s * eta_like_product(6, order)
    inner = [0] * (order + 1)
    for m in range(1, order + 1):
        for k in range(1, order + 1):
            if m * k > order:
                break
            e = m * k
            while e <= order:
                inner[e] += 1
                e += m + k - 1
    assert back.coeffs == tuple(inner)


# --- enumeration -----------------------------------------------------------------

def test_enumerate_rank1_counts_match_series(p2):
    recs = enumerate_gauge_fixed_chi(p2, 1, [0, 0, 0], 2, box_bound=5)
    counts = Counter(int(r.c2) for r in recs)
    series = rank1_fixed_point_series(p2, 2)
    assert counts[0] == series.coeffs[0] == 1
    assert counts[1] == series.coeffs[1] == 3
    assert counts[2] == series.coeffs[2] == 9


def test_enumerate_rank1_c2_zero_is_structure_sheaf(p2, o_p2):
    recs = enumerate_gauge_fixed_chi(p2, 1, [0, 0, 0], 0, box_bound=4)
    assert len(recs) == 1
    assert recs[0].chi.canonical() == characteristic_function(o_p2).trim().canonical()


def test_enumerate_rank1_nonzero_c1(p2):
    recs = enumerate_gauge_fixed_chi(p2, 1, [1, 0, 0], 1, box_bound=5)
    assert len(recs) == 4  # c2 = 0 plus three one-box configurations


def test_enumerate_witnesses_valid(p2):
    for r in enumerate_gauge_fixed_chi(p2, 1, [0, 0, 0], 2, box_bound=5):
        assert validate_torsion_free(r.witness, p2) == []


def test_enumerate_box_independence_rank1(p2):
    a = enumerate_gauge_fixed_chi(p2, 1, [0, 0, 0], 2, box_bound=5)
    b = enumerate_gauge_fixed_chi(p2, 1, [0, 0, 0], 2, box_bound=6)
    assert [r.chi.canonical() for r in a] == [r.chi.canonical() for r in b]


def test_enumerate_box_too_small(p2):
    with pytest.raises(BoxBoundError):
        enumerate_gauge_fixed_chi(p2, 1, [0, 0, 0], 3, box_bound=2)


def test_enumerate_rank_checked(p2):
    with pytest.raises(ValueError):
        enumerate_gauge_fixed_chi(p2, 3, [0, 0, 0], 1)


@pytest.mark.slow
def test_enumerate_rank2_q1_stable_point_count(p2):
    # the q^1 coefficient of the rank-2 series counts the single stable
    # point stratum with c1 = H, c2 = 1 (three pairwise distinct lines)
    recs = enumerate_gauge_fixed_chi(p2, 2, [1, 0, 0], 1, box_bound=3)
    total = sum(
        1
        for r in recs
        for s in r.strata
        if s.mu_verdict == "stable" and s.point_component
    )
    assert total == rank2_p2_series(1).coeffs[1] == 1
    for r in recs:
        assert validate_torsion_free(r.witness, p2) == []


@pytest.mark.slow
def test_enumerate_rank2_box_independence(p2):
    a = enumerate_gauge_fixed_chi(p2, 2, [1, 0, 0], 1, box_bound=3)
    b = enumerate_gauge_fixed_chi(p2, 2, [1, 0, 0], 1, box_bound=4)
    assert [r.chi.canonical() for r in a] == [r.chi.canonical() for r in b]
    assert [sorted(s.pattern for s in r.strata) for r in a] == [
        sorted(s.pattern for s in r.strata) for r in b
    ]
