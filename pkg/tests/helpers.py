"""Independent reference implementations used as test oracles.

Nothing here imports the algorithms under test; only the Graph container and
the hypergraph/network records are shared.
"""
from __future__ import annotations

import random
from itertools import combinations

import networkx as nx

from basisnum.graph import Graph
from basisnum.hypergraph import Hypergraph
from basisnum.thin import Network


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def gf2_rank(vectors) -> int:
    """Rank over GF(2) of edge sets given as Python sets (plain elimination)."""
    rows = [set(v) for v in vectors if v]
    r = 0
    while rows:
        piv = rows.pop()
        if not piv:
            continue
        p = min(piv)
        r += 1
        rows = [row ^ piv if p in row else row for row in rows]
        rows = [row for row in rows if row]
    return r


def mask_to_set(x: int) -> set:
    return {i for i in range(x.bit_length()) if (x >> i) & 1}


def uf_components(n: int, edges) -> list[frozenset]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, set] = {}
    for v in range(n):
        groups.setdefault(find(v), set()).add(v)
    return sorted((frozenset(s) for s in groups.values()), key=min)


def nx_simple_cycles(g: Graph) -> list[set]:
    """Edge-id sets of all simple cycles, via networkx."""
    out = []
    for cyc in nx.simple_cycles(to_nx(g)):
        if len(cyc) < 3:
            continue
        es = {g.edge_id(cyc[i], cyc[(i + 1) % len(cyc)]) for i in range(len(cyc))}
        out.append(es)
    return out


def naive_bn(g: Graph, max_cycles: int = 20) -> int | None:
    """Minimum congestion over all dim-subsets of simple cycles; None if too many cycles."""
    dim = g.m - g.n + len(uf_components(g.n, g.edges))
    if dim == 0:
        return 0
    cycles = nx_simple_cycles(g)
    if len(cycles) > max_cycles:
        return None
    best = None
    for sub in combinations(cycles, dim):
        if gf2_rank(sub) < dim:
            continue
        load = [0] * g.m
        for c in sub:
            for e in c:
                load[e] += 1
        val = max(load)
        if best is None or val < best:
            best = val
    return best


def random_graph(rng: random.Random, n: int, p: float) -> Graph:
    return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p])


def random_connected(rng: random.Random, n: int, extra: float) -> Graph:
    edges = {(rng.randrange(v), v) for v in range(1, n)}
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < extra:
                edges.add((u, v))
    return Graph(n, edges)


# hypergraph networks -----------------------------------------------------------

def all_st_paths(h: Hypergraph, s: int, t: int) -> list[list[int]]:
    """Every s-t path as its sequence of hyperedge indices (exhaustive DFS)."""
    out = []

    def dfs(u, vs, es):
        if u == t:
            out.append(list(es))
            return
        for i, e in enumerate(h.hyperedges):
            if u in e and i not in es:
                for w in sorted(e):
                    if w not in vs:
                        vs.add(w)
                        es.append(i)
                        dfs(w, vs, es)
                        es.pop()
                        vs.discard(w)

    dfs(s, {s}, [])
    return out


def brute_cutedges(net: Network) -> set[int]:
    paths = all_st_paths(net.h, net.s, net.t)
    return set.intersection(*(set(p) for p in paths)) if paths else set()


def random_network(rng: random.Random, n: int | None = None, k: int = 3) -> Network:
    while True:
        nn = n or rng.randint(2, 12)
        m = rng.randint(nn - 1, nn + 4)
        hs = [frozenset(rng.sample(range(nn), rng.randint(1, min(k, nn)))) for _ in range(m)]
        h = Hypergraph.build(range(nn), hs)
        if len(h.components()) == 1:
            s, t = rng.sample(range(nn), 2)
            return Network(h, s, t)


def is_path_of(h: Hypergraph, s: int, t: int, vertices, edges) -> bool:
    if not vertices or vertices[0] != s or vertices[-1] != t or len(edges) != len(vertices) - 1:
        return False
    if len(set(vertices)) != len(vertices) or len(set(edges)) != len(edges):
        return False
    return all({vertices[i], vertices[i + 1]} <= h.hyperedges[e] for i, e in enumerate(edges))
