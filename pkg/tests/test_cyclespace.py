import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

import networkx as nx

from basisnum.cyclespace import (
    CycleFamily,
    CycleSpaceError,
    congestion,
    cycle_space_dimension,
    edge_vector,
    family_from_json,
    family_to_json,
    fundamental_cycles,
    generates_cycle_space,
    girth,
    girth_lower_bound,
    is_f2_cycle,
    make_certificate,
    prune_to_basis,
    rank,
)
from basisnum.generators import clique, cycle, path, petersen, random_tree
from basisnum.graph import Graph
from basisnum.oracle import enumerate_simple_cycles

from helpers import gf2_rank, mask_to_set, nx_simple_cycles, random_graph, to_nx


def tri(g, a, b, c):
    return edge_vector([g.edge_id(a, b), g.edge_id(b, c), g.edge_id(a, c)])


K4 = clique(4)
FACES = [tri(K4, 0, 1, 2), tri(K4, 0, 1, 3), tri(K4, 0, 2, 3)]


def test_is_f2_cycle():
    g = clique(3)
    assert is_f2_cycle(g, 0b111)
    assert not is_f2_cycle(g, 0b001)


def test_xor_closure_random_pairs():
    rng = random.Random(5)
    g = clique(6)
    cycles = enumerate_simple_cycles(g).members
    for _ in range(100):
        a, b = rng.sample(cycles, 2)
        assert is_f2_cycle(g, a ^ b)


def test_dimension():
    assert cycle_space_dimension(clique(5)) == 6
    assert cycle_space_dimension(random_tree(9, random.Random(0))) == 0
    two = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert cycle_space_dimension(two) == 2


def test_dimension_vs_networkx_cycle_basis():
    rng = random.Random(6)
    for _ in range(50):
        g = random_graph(rng, rng.randint(1, 12), rng.random() * 0.6)
        assert cycle_space_dimension(g) == len(nx.cycle_basis(to_nx(g)))


def test_rank_examples():
    assert rank([]) == 0
    assert rank([FACES[0], FACES[0]]) == 1
    all7 = enumerate_simple_cycles(K4).members
    assert len(all7) == 7
    assert rank(all7) == 3 == cycle_space_dimension(K4)


def test_rank_vs_set_elimination():
    rng = random.Random(7)
    for _ in range(100):
        xs = [rng.getrandbits(12) for _ in range(rng.randint(0, 10))]
        assert rank(xs) == gf2_rank([mask_to_set(x) for x in xs])


def test_generates():
    assert generates_cycle_space(K4, FACES)
    assert not generates_cycle_space(K4, FACES[:2])
    assert generates_cycle_space(path(5), [])


def test_generates_names_bad_member():
    with pytest.raises(CycleSpaceError, match="member 1 .*vertex"):
        generates_cycle_space(K4, [FACES[0], 0b1])


def test_congestion_examples():
    assert congestion([FACES[0]], K4.m) == 1
    assert congestion([FACES[0], FACES[0]], K4.m) == 2
    assert congestion(FACES, K4.m) == 2
    assert congestion(CycleFamily(K4, [])) == 0


def test_prune_to_basis_examples():
    fam = CycleFamily(K4, FACES)
    assert prune_to_basis(fam).members == FACES
    c1, c2 = FACES[0], FACES[1]
    assert prune_to_basis(CycleFamily(K4, [c1, c2, c1 ^ c2, FACES[2]])).members == [c1, c2, FACES[2]]
    with pytest.raises(CycleSpaceError):
        prune_to_basis(CycleFamily(K4, FACES[:2]))


def test_prune_random_generating_families():
    rng = random.Random(8)
    for _ in range(50):
        g = random_graph(rng, 7, 0.6)
        cycles = enumerate_simple_cycles(g).members
        fam = fundamental_cycles(g) + rng.sample(cycles, min(len(cycles), 5))
        rng.shuffle(fam)
        out = prune_to_basis(CycleFamily(g, fam))
        assert rank(out.members) == len(out.members) == cycle_space_dimension(g)
        assert congestion(out) <= congestion(fam, g.m)


def test_fundamental_cycles_basis():
    rng = random.Random(9)
    for _ in range(50):
        g = random_graph(rng, rng.randint(1, 15), 0.3)
        fc = fundamental_cycles(g)
        assert len(fc) == cycle_space_dimension(g)
        assert generates_cycle_space(g, fc)


def test_girth_vs_networkx_cycles():
    rng = random.Random(10)
    for _ in range(60):
        g = random_graph(rng, rng.randint(3, 8), 0.4)
        cyc = nx_simple_cycles(g)
        assert girth(g) == (min(map(len, cyc)) if cyc else None)


def test_girth_lower_bound_examples():
    assert girth_lower_bound(petersen()) == Fraction(5, 3)
    assert girth_lower_bound(cycle(5)) == 0
    assert girth_lower_bound(clique(4)) == 1
    with pytest.raises(CycleSpaceError, match="no cycle"):
        girth_lower_bound(path(4))


def test_family_json_round_trip_and_hash_check():
    fam = CycleFamily(K4, FACES)
    back = family_from_json(K4, family_to_json(fam))
    assert back.members == FACES
    with pytest.raises(CycleSpaceError, match="graph_hash"):
        family_from_json(clique(5), family_to_json(fam))


def test_certificate_ok_flags():
    c = make_certificate(K4, FACES, 2)
    assert c.ok and c.failure() is None
    c = make_certificate(K4, FACES, 1)
    assert not c.ok and "congestion 2 > claimed 1" in c.failure()


@given(st.integers(3, 9), st.integers(0, 2**30))
def test_xor_of_cycles_property(n, seed):
    rng = random.Random(seed)
    g = random_graph(rng, n, 0.5)
    fc = fundamental_cycles(g)
    if len(fc) < 2:
        return
    a, b = rng.sample(fc, 2)
    assert is_f2_cycle(g, a ^ b)
    assert rank(fc + [a ^ b]) == len(fc)
