import pytest

from toricsheaves.family import RayFiltration, reflexive_from_filtrations
from toricsheaves.fan import hirzebruch, p1_x_p1, projective_plane
from toricsheaves.intersect import find_ample, intersection_table
from toricsheaves.subspace import SubspaceQ


@pytest.fixture(scope="session")
def p2():
    return projective_plane()


@pytest.fixture(scope="session")
def p1p1():
    return p1_x_p1()


@pytest.fixture(scope="session")
def f1():
    return hirzebruch(1)


@pytest.fixture(scope="session")
def corpus(p2, p1p1, f1):
    return {"p2": p2, "p1xp1": p1p1, "f1": f1}


@pytest.fixture(scope="session")
def amples(corpus):
    return {name: find_ample(fan) for name, fan in corpus.items()}


@pytest.fixture(scope="session")
def tables(corpus):
    return {name: intersection_table(fan) for name, fan in corpus.items()}


def structure_sheaf(fan, rank=1):
    full = SubspaceQ.full(rank)
    filts = [RayFiltration(j, ((0, full),)) for j in range(fan.n_rays())]
    return reflexive_from_filtrations(filts, fan)


def line_bundle_family(fan, kvec):
    full = SubspaceQ.full(1)
    filts = [RayFiltration(j, ((-kvec[j], full),)) for j in range(fan.n_rays())]
    return reflexive_from_filtrations(filts, fan)


def rank2_three_lines(fan, gaps=None, bases=None, lines=None):
    n = fan.n_rays()
    gaps = gaps or [1] * n
    bases = bases or [0] * n
    full = SubspaceQ.full(2)
    pool = [(1, 0), (0, 1), (1, 1), (1, 2), (2, 1), (1, 3)]
    lines = lines or [SubspaceQ.span([pool[j % len(pool)]], 2) for j in range(n)]
    filts = []
    for j in range(n):
        if gaps[j] == 0:
            filts.append(RayFiltration(j, ((bases[j], full),)))
        else:
            filts.append(
                RayFiltration(j, ((bases[j], lines[j]), (bases[j] + gaps[j], full)))
            )
    return reflexive_from_filtrations(filts, fan)


@pytest.fixture(scope="session")
def o_p2(p2):
    return structure_sheaf(p2)
