import random
from itertools import combinations

import networkx as nx
import pytest

from basisnum.cyclespace import CycleSpaceError, girth, girth_lower_bound, make_certificate
from basisnum.generators import clique, complete_bipartite, cycle, path, petersen, random_tree
from basisnum.graph import Graph
from basisnum.oracle import CycleLimitExceeded, enumerate_simple_cycles, exact_basis_number, verify_certificate

from helpers import gf2_rank, naive_bn, nx_simple_cycles, random_graph


def test_enumerate_examples():
    assert len(enumerate_simple_cycles(clique(4))) == 7
    assert len(enumerate_simple_cycles(cycle(6))) == 1
    assert len(enumerate_simple_cycles(path(6))) == 0


def test_enumerate_vs_networkx():
    rng = random.Random(11)
    for _ in range(60):
        g = random_graph(rng, rng.randint(3, 8), 0.5)
        ours = sorted(enumerate_simple_cycles(g).members)
        ref = sorted(sum(1 << e for e in c) for c in nx_simple_cycles(g))
        assert ours == ref


def test_enumerate_limit():
    with pytest.raises(CycleLimitExceeded):
        enumerate_simple_cycles(clique(7), limit=100)


@pytest.mark.parametrize(
    "g, bn",
    [(clique(5), 3), (clique(4), 2), (path(5), 0), (cycle(3), 1), (cycle(8), 1)],
)
def test_exact_values(g, bn):
    res = exact_basis_number(g)
    assert res.bn == bn and not res.timed_out
    assert res.witness.ok and res.witness.measured_congestion == bn


def test_k33_at_least_three():
    assert exact_basis_number(complete_bipartite(3, 3)).bn >= 3


def test_trees():
    rng = random.Random(12)
    for _ in range(10):
        assert exact_basis_number(random_tree(rng.randint(1, 12), rng)).bn == 0


def test_oracle_equals_naive_subset_search():
    rng = random.Random(13)
    checked = 0
    while checked < 60:
        g = random_graph(rng, rng.randint(3, 7), rng.uniform(0.3, 0.7))
        ref = naive_bn(g)
        if ref is None:
            continue
        checked += 1
        assert exact_basis_number(g).bn == ref, g.edges


def test_sanity_envelope():
    rng = random.Random(14)
    for _ in range(40):
        g = random_graph(rng, rng.randint(3, 8), 0.5)
        res = exact_basis_number(g)
        if girth(g) is not None:
            assert girth_lower_bound(g) <= res.bn <= g.m


def test_budget_exhaustion_reports_upper_bound():
    g = clique(6)
    res = exact_basis_number(g, budget=1)
    assert res.timed_out
    assert res.witness.ok  # greedy basis, still a valid certificate
    assert res.bn >= exact_basis_number(g).bn


def test_budget_env(monkeypatch):
    monkeypatch.setenv("BN_BUDGET", "1")
    assert exact_basis_number(clique(6)).timed_out


def test_verify_examples():
    k5 = clique(5)
    w = exact_basis_number(k5).witness
    assert verify_certificate(k5, w) == (True, "ok")
    tampered = make_certificate(k5, w.family.members[:-1], 3)
    ok, reason = verify_certificate(k5, tampered)
    assert not ok and reason == "rank 5 < 6"
    t = path(4)
    assert verify_certificate(t, make_certificate(t, [], 0))[0]


def test_verify_rejects_overclaim_and_non_cycle():
    k4 = clique(4)
    w = exact_basis_number(k4).witness
    low = make_certificate(k4, w.family.members, 1)
    assert verify_certificate(k4, low) == (False, "congestion 2 > claimed 1")
    with pytest.raises(CycleSpaceError):
        make_certificate(k4, [0b1], 1)


def test_disconnected_graph():
    g = Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])
    assert exact_basis_number(g).bn == 1


def test_petersen_needs_three():
    # congestion 2 would force six 5-cycles covering every edge exactly twice; no such six are independent
    h = nx.petersen_graph()
    eid = {frozenset(e): i for i, e in enumerate(h.edges())}
    pent = {frozenset(eid[frozenset((c[i], c[(i + 1) % 5]))] for i in range(5)) for c in nx.simple_cycles(h.to_directed()) if len(c) == 5}
    covers = [s for s in combinations(pent, 6) if all(sum(e in x for x in s) <= 2 for e in range(15))]
    assert covers and all(gf2_rank(s) == 5 for s in covers)
    r = exact_basis_number(petersen())
    assert r.bn == 3 and verify_certificate(petersen(), r.witness)[0]
