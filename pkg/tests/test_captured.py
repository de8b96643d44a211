import random
from collections import Counter

import networkx as nx
import pytest

from basisnum.captured import (
    CapturedBasisError,
    CapturingPathFamily,
    captured_adhesion_basis,
    default_path_family,
    path_family_congestion,
    pf_from_json,
    pf_to_json,
)
from basisnum.cyclespace import cycle_space_dimension, fundamental_cycles
from basisnum.decomposition import TreeDecomposition, make_sane
from basisnum.generators import clique, path, random_td
from basisnum.graph import Graph, VertexPath
from basisnum.oracle import exact_basis_number, verify_certificate

from helpers import to_nx


def oracle_torsos(g, td):
    return {t: exact_basis_number(td.torso(g, t)[0]).witness.family.members for t in td.preorder}


def test_single_bag_returns_torso_basis():
    g = clique(5)
    td = TreeDecomposition({0: None}, {0: range(5)})
    basis = exact_basis_number(g).witness.family.members
    cert = captured_adhesion_basis(g, td, {0: basis}, default_path_family(g, td))
    assert cert.family.members == basis


def test_two_triangles_over_a_non_edge():
    # C4 0-2-1-3; bags {0,1,2} and {0,1,3}; the adhesion pair 01 is not an edge
    g = Graph(4, [(0, 2), (1, 2), (0, 3), (1, 3)])
    td = TreeDecomposition({0: None, 1: 0}, {0: {0, 1, 2}, 1: {0, 1, 3}})
    pf = default_path_family(g, td)
    cert = captured_adhesion_basis(g, td, oracle_torsos(g, td), pf)
    assert cert.details["kinds"] and set(cert.details["kinds"]) == {"type2"}
    assert cert.rank == cycle_space_dimension(g) == 1
    assert verify_certificate(g, cert)[0]


def test_default_family_empty_for_single_bag():
    g = clique(4)
    assert len(default_path_family(g, TreeDecomposition({0: None}, {0: range(4)}))) == 0


def test_default_family_star_td_over_path():
    g = path(7)
    td = TreeDecomposition({0: None, 1: 0, 2: 0, 3: 0}, {0: {0, 3, 6}, 1: {0, 1, 2, 3}, 2: {3, 4, 5, 6}, 3: {0, 6}})
    pf = default_path_family(g, td)
    assert pf.missing(td) is None
    h = to_nx(g)
    for (t, pair), p in pf.entries.items():
        u, v = sorted(pair)
        assert list(p.vertices) in (nx.shortest_path(h, u, v), nx.shortest_path(h, v, u))


def test_default_family_complete_on_random():
    rng = random.Random(40)
    for _ in range(30):
        g, td = random_td(rng.randint(4, 15), rng)
        assert default_path_family(g, td).missing(td) is None


def test_path_family_congestion():
    g = path(3)
    pf = CapturingPathFamily()
    assert path_family_congestion(pf) == 0
    p = VertexPath.from_vertices(g, [0, 1, 2])
    pf.set(1, 0, 2, p)
    pf.set(2, 0, 2, p)
    assert path_family_congestion(pf) == 2


def test_path_family_congestion_vs_recount():
    rng = random.Random(41)
    for _ in range(30):
        g, td = random_td(rng.randint(4, 15), rng)
        pf = default_path_family(g, td)
        load = Counter(e for p in pf.entries.values() for e in p.edge_ids)
        assert path_family_congestion(pf) == max(load.values(), default=0)


def test_pf_json_round_trip():
    rng = random.Random(42)
    g, td = random_td(12, rng)
    pf = default_path_family(g, td)
    back = pf_from_json(g, pf_to_json(pf))
    assert back.entries == pf.entries


def test_missing_entry_is_reported():
    g = Graph(4, [(0, 2), (1, 2), (0, 3), (1, 3)])
    td = TreeDecomposition({0: None, 1: 0}, {0: {0, 1, 2}, 1: {0, 1, 3}})
    with pytest.raises(CapturedBasisError, match="no entry for node 1"):
        captured_adhesion_basis(g, td, oracle_torsos(g, td), CapturingPathFamily())


def test_bad_torso_basis_is_reported():
    g = clique(4)
    td = TreeDecomposition({0: None}, {0: range(4)})
    with pytest.raises(CapturedBasisError, match="does not generate"):
        captured_adhesion_basis(g, td, {0: fundamental_cycles(g)[:2]}, default_path_family(g, td))


def test_random_instances_and_accounting():
    rng = random.Random(43)
    for _ in range(60):
        g, td = random_td(rng.randint(4, 14), rng, width=rng.randint(1, 3), p=rng.uniform(0.3, 0.9))
        if rng.random() < 0.5:
            td = make_sane(g, td)
        cert = captured_adhesion_basis(g, td, oracle_torsos(g, td), default_path_family(g, td))
        b, c = cert.details["b"], cert.details["c"]
        assert cert.rank == cycle_space_dimension(g)
        assert cert.measured_congestion <= (2 * c + 1) * (b + 1) == cert.claimed_congestion
        assert max(cert.details["type1_load"], default=0) <= 2 * c + 1
        assert max(cert.details["core_load"], default=0) <= b
        assert max(cert.details["substitute_load"], default=0) <= 2 * b * c
