"""Deterministic instance generators: fixtures and random structured graphs."""
from __future__ import annotations

import random
from itertools import combinations

from .decomposition import PathDecomposition, TreeDecomposition
from .graph import Graph
from .semigroup import BiInterfaceGraph, abstraction, glue, product

__all__ = [
    "clique",
    "cycle",
    "path",
    "ladder",
    "complete_bipartite",
    "petersen",
    "random_tree",
    "random_graph",
    "random_cubic",
    "apex_over",
    "random_pathwidth",
    "random_td",
    "random_letter",
    "idempotent_letter",
]


def clique(n: int) -> Graph:
    return Graph(n, combinations(range(n), 2))


def cycle(n: int) -> Graph:
    if n < 3:
        raise ValueError("a cycle needs at least 3 vertices")
    return Graph(n, [(i, (i + 1) % n) for i in range(n)])


def path(n: int) -> Graph:
    return Graph(n, [(i, i + 1) for i in range(n - 1)])


def ladder(n: int) -> Graph:
    """2 x n grid: rungs (i, n+i), rails i -- i+1 and n+i -- n+i+1."""
    es = [(i, n + i) for i in range(n)]
    es += [(i, i + 1) for i in range(n - 1)] + [(n + i, n + i + 1) for i in range(n - 1)]
    return Graph(2 * n, es)


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return Graph(10, outer + spokes + inner)


def random_tree(n: int, rng: random.Random) -> Graph:
    return Graph(n, [(rng.randrange(i), i) for i in range(1, n)])


def random_graph(n: int, p: float, rng: random.Random) -> Graph:
    return Graph(n, [(u, v) for u, v in combinations(range(n), 2) if rng.random() < p])


def random_cubic(n: int, rng: random.Random, tries: int = 1000) -> Graph:
    """Uniform-ish simple cubic graph by the pairing model with restarts."""
    if n % 2 or n < 4:
        raise ValueError("cubic graphs need an even number n >= 4 of vertices")
    for _ in range(tries):
        pts = [v for v in range(n) for _ in range(3)]
        rng.shuffle(pts)
        es = {(min(a, b), max(a, b)) for a, b in zip(pts[::2], pts[1::2])}
        if len(es) == 3 * n // 2 and all(a != b for a, b in es):
            return Graph(n, es)
    raise RuntimeError("pairing model kept producing loops or multi-edges")


def apex_over(h: Graph) -> Graph:
    """h plus a new vertex h.n adjacent to every vertex of h."""
    return Graph(h.n + 1, list(h.edges) + [(v, h.n) for v in range(h.n)])


def random_pathwidth(n: int, k: int, rng: random.Random, p: float = 0.6) -> tuple[Graph, PathDecomposition]:
    """Graph of pathwidth <= k with a witnessing path-decomposition.

    Vertex i joins the window [s_i, i] of at most k+1 vertices (s_i is
    nondecreasing) and links to earlier window vertices with probability p.
    """
    es = set()
    bags = []
    s = 0
    for i in range(n):
        s = max(s, i - k)
        if i > s and rng.random() < 0.3:
            s = rng.randint(s, i - 1)
        for u in range(s, i):
            if rng.random() < p:
                es.add((u, i))
        bags.append(frozenset(range(s, i + 1)))
    return Graph(n, es), PathDecomposition(bags)


def random_td(n: int, rng: random.Random, width: int = 3, p: float = 0.7) -> tuple[Graph, TreeDecomposition]:
    """Connected graph with a tree-decomposition of width <= ``width`` built by attaching bags.

    Connectivity is forced: the root bag carries a path and every new vertex
    gets an edge into the part of its bag shared with the parent.
    """
    if width < 1:
        raise ValueError("width must be at least 1")
    root = rng.sample(range(n), min(n, width))
    bags = {0: set(root)}
    par = {0: None}
    cover = set(root)
    es = {tuple(sorted(e)) for e in zip(root, root[1:])}
    i = 1
    while cover != set(range(n)):
        q = rng.randrange(i)
        keep = set(rng.sample(sorted(bags[q]), rng.randint(1, max(1, min(width - 1, len(bags[q]))))))
        fresh = rng.randint(1, max(1, min(2, width + 1 - len(keep))))
        new = set(rng.sample(sorted(set(range(n)) - cover), min(fresh, n - len(cover))))
        for v in sorted(new):
            es.add(tuple(sorted((v, rng.choice(sorted(keep))))))
        bags[i] = keep | new
        par[i] = q
        cover |= new
        i += 1
    for b in bags.values():
        for u, v in combinations(sorted(b), 2):
            if rng.random() < p:
                es.add((u, v))
    return Graph(n, es), TreeDecomposition(par, bags)


def random_letter(k: int, rng: random.Random, max_vertices: int = 5, p: float = 0.4) -> BiInterfaceGraph:
    """Random bi-interface graph of arity k with some persistent slots."""
    n = rng.randint(1, max_vertices)
    es = [(a, b) for a, b in combinations(range(n), 2) if rng.random() < p]
    order = list(range(n))
    rng.shuffle(order)
    lam: list = [None] * k
    rho: list = [None] * k
    free = iter(order)
    for i in range(k):
        if rng.random() < 0.6:
            lam[i] = next(free, None)
    left = {x for x in lam if x is not None}
    for i in range(k):
        r = rng.random()
        if r < 0.3 and lam[i] is not None:
            rho[i] = lam[i]
        elif r < 0.8:
            cand = [v for v in order if v not in left and v not in rho]
            if cand:
                rho[i] = rng.choice(cand)
    return BiInterfaceGraph.build(range(n), es, lam, rho)


def idempotent_letter(k: int, rng: random.Random, max_vertices: int = 4, max_power: int = 64) -> BiInterfaceGraph:
    """Power of a random letter whose abstraction is idempotent.

    Some power a^n with n <= |S| of any element a is idempotent; squaring alone
    would miss it when the period of a is not a power of two.
    """
    letter = random_letter(k, rng, max_vertices)
    a = abstraction(letter)
    cur, x = letter, a
    for _ in range(max_power):
        if product(x, x) == x:
            return cur
        cur = glue(cur, letter)
        x = product(x, a)
    raise RuntimeError(f"no idempotent power up to {max_power}")
