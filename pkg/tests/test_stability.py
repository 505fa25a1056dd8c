import random
from fractions import Fraction

import pytest

from conftest import line_bundle_family, rank2_three_lines, structure_sheaf
from toricsheaves.chern import hilbert_polynomial
from toricsheaves.family import (
    DeltaFamily,
    KIND_TORSION_FREE,
    characteristic_function,
    tensor_line_bundle,
)
from toricsheaves.intersect import intersection_table, pair
from toricsheaves.polynomials import RatPoly, compare_for_large_t
from toricsheaves.sampling import random_families
from toricsheaves.stability import (
    SEMISTABLE,
    STABLE,
    UNSTABLE,
    WeightSystem,
    choose_r,
    distinguished_subspaces,
    extract_flag_data,
    gieseker_test,
    git_test,
    mu_test,
    mu_weights,
    random_subspaces,
    xi_reconstruct,
    xi_weights,
)
from toricsheaves.subspace import SubspaceQ

H_P2 = (1, 0, 0)
LINES = [SubspaceQ.span([v], 2) for v in [(1, 0), (0, 1), (1, 1)]]


def split_with_cut(p2):
    """O + O with the second summand cut at one fixed point: equal slopes,
    strictly smaller Hilbert polynomial."""
    fam = structure_sheaf(p2, rank=2)
    corners = {i: g.pad_top(1) for i, g in fam.corners}
    corners[0] = corners[0].with_value(
        corners[0].lo, SubspaceQ.span([(1, 0)], 2)
    )
    return DeltaFamily(KIND_TORSION_FREE, 2, tuple(sorted(corners.items())))


# --- distinguished subspaces -------------------------------------------------

def test_distinguished_rank1_empty(p2, o_p2):
    assert distinguished_subspaces(o_p2) == []


def test_distinguished_three_lines(p2):
    fam = rank2_three_lines(p2, lines=LINES)
    assert set(distinguished_subspaces(fam)) == set(LINES)


def test_distinguished_single_line(p2):
    fam = rank2_three_lines(p2, lines=[LINES[0]] * 3)
    assert distinguished_subspaces(fam) == [LINES[0]]


# --- slope test ----------------------------------------------------------------

def test_mu_three_distinct_lines_stable(p2):
    v = mu_test(rank2_three_lines(p2, lines=LINES), p2, H_P2)
    assert v.verdict == STABLE and v.exhaustive
    # the margin for each flag line is 1 - 3/2
    assert v.margin == Fraction(-1, 2)


def test_mu_split_strictly_semistable(p2):
    v = mu_test(structure_sheaf(p2, rank=2), p2, H_P2)
    assert v.verdict == SEMISTABLE
    assert v.witness is not None and v.witness.dim == 1


def test_mu_one_line_unstable(p2):
    fam = rank2_three_lines(p2, gaps=[2, 2, 2], lines=[LINES[0]] * 3)
    v = mu_test(fam, p2, H_P2)
    assert v.verdict == UNSTABLE
    assert v.witness == LINES[0]
    assert v.margin > 0


def test_mu_rank1_stable(p2, o_p2):
    assert mu_test(o_p2, p2, H_P2).verdict == STABLE


def test_mu_rank3_flagged(p2):
    v = mu_test(structure_sheaf(p2, rank=3), p2, H_P2)
    assert not v.exhaustive
    assert v.note and "distinguished-set" in v.note


def nonreflexive_stable_family(p2):
    """Three distinct lines with one genuine interior cut: the value L1 at
    (1, 0) drops to zero, so the family is torsion-free but not reflexive,
    while the ray flags (hence the slope verdict) are unchanged."""
    fam = rank2_three_lines(p2, lines=LINES)
    corners = {i: g.pad_top(1) for i, g in fam.corners}
    assert corners[0].value((1, 0)).dim == 1
    corners[0] = corners[0].with_value((1, 0), SubspaceQ.zero(2))
    return DeltaFamily(KIND_TORSION_FREE, 2, tuple(sorted(corners.items())))


def test_mu_nonreflexive_stable_caveat(p2):
    from toricsheaves.family import is_reflexive

    cut = nonreflexive_stable_family(p2)
    assert not is_reflexive(cut, p2)
    v = mu_test(cut, p2, H_P2)
    assert v.verdict == STABLE
    assert v.note and "equivariant" in v.note


def test_mu_requires_ample(p2, o_p2):
    with pytest.raises(ValueError):
        mu_test(o_p2, p2, (0, 0, 0))


# --- Gieseker test ----------------------------------------------------------------

def test_gieseker_stable_from_mu_stable(p2):
    fam = rank2_three_lines(p2, lines=LINES)
    assert gieseker_test(fam, p2, H_P2).verdict == STABLE


def test_gieseker_split_semistable(p2):
    assert gieseker_test(structure_sheaf(p2, rank=2), p2, H_P2).verdict == SEMISTABLE


def test_gieseker_cut_split_unstable(p2):
    fam = split_with_cut(p2)
    assert mu_test(fam, p2, H_P2).verdict == SEMISTABLE
    v = gieseker_test(fam, p2, H_P2)
    assert v.verdict == UNSTABLE
    assert v.witness == SubspaceQ.span([(1, 0)], 2)
    # the margin polynomial is the constant 1/2 excess of the subsheaf
    assert compare_for_large_t(v.margin, RatPoly.zero()) > 0


def test_gieseker_consistent_with_mu(corpus, amples):
    # mu-stable implies Gieseker stable; Gieseker semistable implies mu-semistable
    for name, fan in corpus.items():
        for fam in random_families(fan, 2, 25, seed=113):
            m = mu_test(fam, fan, amples[name]).verdict
            g = gieseker_test(fam, fan, amples[name]).verdict
            if m == STABLE:
                assert g == STABLE
            if g in (STABLE, SEMISTABLE):
                assert m in (STABLE, SEMISTABLE)


# --- weight systems ----------------------------------------------------------------

def test_mu_weights_unit_gaps(p2):
    w = mu_weights(rank2_three_lines(p2, lines=LINES), p2, H_P2)
    assert sorted(wt for _, wt in w.items()) == [1, 1, 1]
    keys = {cone for (cone, _), _ in w.items()}
    assert keys == {(0,), (1,), (2,)}


def test_mu_weights_scale_with_polarization(p2):
    fam = rank2_three_lines(p2, lines=LINES)
    w1 = mu_weights(fam, p2, (1, 0, 0))
    w2 = mu_weights(fam, p2, (2, 0, 0))
    assert [wt for _, wt in w2.items()] == [2 * wt for _, wt in w1.items()]


def test_mu_weights_all_gaps_zero_rejected(p2):
    with pytest.raises(ValueError):
        mu_weights(structure_sheaf(p2, rank=2), p2, H_P2)


def test_mu_weights_pure_rejected(p2, o_p2):
    from test_family import slab_family

    with pytest.raises(ValueError):
        mu_weights(slab_family(p2, 0), p2, H_P2)


def test_mu_weights_torsion_free_branch(p2):
    cut = nonreflexive_stable_family(p2)
    w = mu_weights(cut, p2, H_P2)
    weights = sorted(wt for _, wt in w.items())
    n_sum = sum(
        v.dim
        for _, g in cut.corners
        for lam, v in zip(g.points(), g.values)
        if 0 < v.dim < 2 and sum(1 for k in range(2) if lam[k] < g.hi[k]) >= 2
    )
    r_scale = 4 * n_sum + 1
    assert weights.count(1) == len(weights) - 3
    assert weights[-3:] == [r_scale] * 3


# --- GIT test -------------------------------------------------------------------------

def test_git_rank1_properly_stable(p2, o_p2):
    v = git_test(o_p2, WeightSystem(1, ()), p2)
    assert v.verdict == STABLE


def test_git_split_trivial_weights_semistable(p2):
    # all-gaps-zero data has no Grassmannian factors: the empty weight
    # system makes every subspace a margin-0 witness
    v = git_test(structure_sheaf(p2, rank=2), WeightSystem(2, ()), p2)
    assert v.verdict == SEMISTABLE


def test_git_mu_stable_example(p2):
    fam = rank2_three_lines(p2, lines=LINES)
    v = git_test(fam, mu_weights(fam, p2, H_P2), p2)
    assert v.verdict == STABLE


def test_git_implication_chain(corpus, amples):
    for name, fan in corpus.items():
        for fam in random_families(fan, 2, 25, seed=131):
            m = mu_test(fam, fan, amples[name]).verdict
            try:
                w = mu_weights(fam, fan, amples[name])
            except ValueError:
                assert m != STABLE
                continue
            g = git_test(fam, w, fan).verdict
            if m == STABLE:
                assert g == STABLE
            if g == STABLE:
                assert m in (STABLE, SEMISTABLE)


def test_git_weight_key_mismatch(p2, o_p2):
    bad = WeightSystem(1, ((((0,), (0, 0)), 1),))
    with pytest.raises(ValueError):
        git_test(o_p2, bad, p2)


def test_weight_positivity_enforced():
    with pytest.raises(ValueError):
        WeightSystem(2, ((((0,), (0,)), 0),))


# --- face weight polynomials -----------------------------------------------------------

def test_xi_identity_structure_sheaf(p2, o_p2):
    chi = characteristic_function(o_p2)
    xi = xi_weights(chi, p2, H_P2)
    p = xi_reconstruct(xi, o_p2, p2)
    assert p == hilbert_polynomial(o_p2, p2, H_P2)
    assert p == RatPoly.of([1, Fraction(3, 2), Fraction(1, 2)])


def test_xi_degree_bound(p2):
    fam = rank2_three_lines(p2, lines=LINES)
    xi = xi_weights(characteristic_function(fam), p2, H_P2)
    for (cone, _), poly in xi.entries:
        assert poly.degree <= 2 - len(cone)


def test_xi_ray_leading_coefficient_is_ample_degree(p2, tables):
    fam = rank2_three_lines(p2, lines=LINES)
    xi = xi_weights(characteristic_function(fam), p2, H_P2)
    n = 3
    unit = lambda j: tuple(Fraction(1 if i == j else 0) for i in range(n))
    h = tuple(Fraction(x) for x in H_P2)
    for (cone, _), poly in xi.entries:
        if len(cone) == 1:
            assert poly.coeff(1) == pair(h, unit(cone[0]), tables["p2"])
            assert poly.coeff(1) > 0


def test_xi_reconstruction_randomized(corpus, amples):
    for name, fan in corpus.items():
        for fam in random_families(fan, 2, 10, seed=139):
            chi = characteristic_function(fam)
            xi = xi_weights(chi, fan, amples[name])
            assert xi_reconstruct(xi, fam, fan) == hilbert_polynomial(
                fam, fan, amples[name]
            )


def test_choose_r_certifies(p2):
    fam = rank2_three_lines(p2, lines=LINES)
    chi = characteristic_function(fam)
    r, w = choose_r(chi, p2, H_P2, [fam])
    assert all(wt > 0 for _, wt in w.items())
    assert git_test(fam, w, p2).verdict == gieseker_test(fam, p2, H_P2).verdict


def test_mu_verdicts_invariant_under_arbitrary_twists(corpus, amples):
    rng = random.Random(149)
    for name, fan in corpus.items():
        n = fan.n_rays()
        for fam in random_families(fan, 2, 10, seed=151):
            kvec = tuple(rng.randrange(-2, 3) for _ in range(n))
            tw = tensor_line_bundle(fam, kvec)
            assert (
                mu_test(fam, fan, amples[name]).verdict
                == mu_test(tw, fan, amples[name]).verdict
            )


def test_gieseker_invariant_under_polarization_twists(corpus, amples):
    # twisting by a multiple of the polarization shifts t and cannot change
    # the large-t comparison; arbitrary twists can (see the counterexample)
    for name, fan in corpus.items():
        h = tuple(int(x) for x in amples[name])
        for fam in random_families(fan, 2, 10, seed=151):
            for m in (-1, 2):
                tw = tensor_line_bundle(fam, tuple(m * x for x in h))
                assert (
                    gieseker_test(fam, fan, amples[name]).verdict
                    == gieseker_test(tw, fan, amples[name]).verdict
                )


def test_gieseker_not_invariant_under_arbitrary_twists(p1p1):
    # O(f1-f2) + O(f2-f1) is strictly Gieseker semistable for H = f1+f2,
    # but its twist by O(f2-f1) has a subsheaf with the same slope and a
    # larger constant Hilbert coefficient
    from toricsheaves.family import RayFiltration, reflexive_from_filtrations

    full = SubspaceQ.full(2)
    e1 = SubspaceQ.span([(1, 0)], 2)
    e2 = SubspaceQ.span([(0, 1)], 2)
    filts = [
        RayFiltration(0, ((-1, e1), (1, full))),
        RayFiltration(1, ((-1, e2), (1, full))),
        RayFiltration(2, ((0, full),)),
        RayFiltration(3, ((0, full),)),
    ]
    fam = reflexive_from_filtrations(filts, p1p1)
    h = (1, 1, 0, 0)
    assert gieseker_test(fam, p1p1, h).verdict == SEMISTABLE
    tw = tensor_line_bundle(fam, (-1, 1, 0, 0))
    assert mu_test(tw, p1p1, h).verdict == SEMISTABLE
    assert gieseker_test(tw, p1p1, h).verdict == UNSTABLE


def test_git_verdicts_invariant_under_arbitrary_twists(corpus, amples):
    rng = random.Random(253)
    for name, fan in corpus.items():
        n = fan.n_rays()
        for fam in random_families(fan, 2, 8, seed=257):
            try:
                w = mu_weights(fam, fan, amples[name])
            except ValueError:
                continue
            kvec = tuple(rng.randrange(-2, 3) for _ in range(n))
            tw = tensor_line_bundle(fam, kvec)
            w_tw = mu_weights(tw, fan, amples[name])
            assert (
                git_test(fam, w, fan).verdict == git_test(tw, w_tw, fan).verdict
            )


def test_fuzz_no_violation_of_exhaustive_verdicts(p2):
    # random subspaces can never beat a verdict established on the
    # distinguished set in rank 2
    rng = random.Random(157)
    fams = random_families(p2, 2, 10, seed=163)
    for fam in fams:
        base = mu_test(fam, p2, H_P2)
        flags = extract_flag_data(fam, p2)
        table = intersection_table(p2)
        n = 3
        unit = lambda j: tuple(Fraction(1 if i == j else 0) for i in range(n))
        h = tuple(Fraction(x) for x in H_P2)
        deg = [pair(h, unit(j), table) for j in range(n)]
        total = sum(
            rf.gaps[k] * deg[rf.ray] * (k + 1)
            for rf in flags.rays
            for k in range(1)
        )
        for w in random_subspaces(2, 40, rng):
            lhs = sum(
                rf.gaps[k] * deg[rf.ray] * rf.flags[k].intersect(w).dim
                for rf in flags.rays
                for k in range(1)
                if rf.gaps[k]
            )
            margin = lhs - Fraction(w.dim, 2) * total
            if base.verdict == STABLE:
                assert margin < 0
            elif base.verdict == SEMISTABLE:
                assert margin <= 0


def test_verdicts_against_brute_force_line_sweep(p2, amples):
    # independent check of the finite test-set reduction: sweep every line
    # spanned by a small integer vector and confirm no margin contradicts
    # the verdict computed from the distinguished set
    from math import gcd

    from toricsheaves.family import intersect_with_subspace

    h = amples["p2"]
    table = intersection_table(p2)
    n = 3
    unit = lambda j: tuple(Fraction(1 if i == j else 0) for i in range(n))
    deg = [pair(tuple(Fraction(x) for x in h), unit(j), table) for j in range(n)]
    lines = []
    seen = set()
    for a in range(-3, 4):
        for b in range(-3, 4):
            if (a, b) == (0, 0) or gcd(abs(a), abs(b)) > 1:
                continue
            rep = (a, b) if (a, b) > (-a, -b) else (-a, -b)
            if rep not in seen:
                seen.add(rep)
                lines.append(SubspaceQ.span([rep], 2))
    for fam in random_families(p2, 2, 12, seed=211):
        mu = mu_test(fam, p2, h)
        gz = gieseker_test(fam, p2, h)
        flags = extract_flag_data(fam, p2)
        total = sum(rf.gaps[0] * deg[rf.ray] for rf in flags.rays)
        p_e = hilbert_polynomial(fam, p2, h).scale(Fraction(1, 2))
        worst_mu = None
        worst_g = None
        for w in lines:
            m = sum(
                rf.gaps[0] * deg[rf.ray] * rf.flags[0].intersect(w).dim
                for rf in flags.rays
                if rf.gaps[0]
            ) - Fraction(1, 2) * total
            worst_mu = m if worst_mu is None else max(worst_mu, m)
            diff = hilbert_polynomial(intersect_with_subspace(fam, w), p2, h) - p_e
            sign = compare_for_large_t(diff, RatPoly.zero())
            worst_g = sign if worst_g is None else max(worst_g, sign)
        expect_mu = {STABLE: -1, SEMISTABLE: 0, UNSTABLE: 1}[mu.verdict]
        got_mu = (worst_mu > 0) - (worst_mu < 0)
        assert got_mu == expect_mu
        expect_g = {STABLE: -1, SEMISTABLE: 0, UNSTABLE: 1}[gz.verdict]
        assert worst_g == expect_g


def test_xi_weights_error_cases(p2, o_p2):
    from toricsheaves.family import characteristic_function as charfn

    chi = charfn(o_p2)
    with pytest.raises(ValueError):
        xi_weights(chi, p2, (0, 0, 0))  # not ample
    from toricsheaves.family import CharFunction, DimGrid

    bad = CharFunction(
        2,
        tuple(
            (i, DimGrid(mc, (0, 0), (0, 0), (1,)))
            for i, mc in enumerate(p2.max_cones)
        ),
    )
    with pytest.raises(ValueError):
        xi_weights(bad, p2, H_P2)  # does not saturate to the rank
