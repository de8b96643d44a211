"""Combination rules for cycle bases: unions, vertex/edge edits, separators.

Families are edge bitsets over the ids of the host graph ``g``.  Every
function returns a BasisCertificate whose ``claimed_congestion`` is the bound
actually guaranteed by the construction; ``details["ideal"]`` records the
sharper asymptotic bound where the construction uses a linear fallback.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .cyclespace import (
    BasisCertificate,
    CycleFamily,
    CycleSpaceError,
    congestion,
    edge_ids,
    make_certificate,
    odd_vertices,
    prune_to_basis,
    rank,
)
from .graph import Graph, Separation, spanning_forest

__all__ = [
    "Subgraph",
    "CombinatorError",
    "subgraph_dimension",
    "combine_union",
    "add_vertex",
    "star_family",
    "apex_triangle_family",
    "add_edges_fallback",
    "delete_edges",
    "delete_edge_graph",
    "split_small_separator",
    "combine_components",
]


class CombinatorError(ValueError):
    pass


def _members(fam) -> list[int]:
    if fam is None:
        return []
    return list(fam.members if isinstance(fam, CycleFamily) else fam)


@dataclass(frozen=True)
class Subgraph:
    """Subgraph of a host graph: vertex set and host edge ids."""

    vertices: frozenset
    edges: frozenset

    @staticmethod
    def induced(g: Graph, vs: Iterable[int]) -> "Subgraph":
        s = frozenset(vs)
        return Subgraph(s, frozenset(g.edge_subgraph_ids(s)))

    @staticmethod
    def from_edges(g: Graph, eids: Iterable[int], vertices: Iterable[int] = ()) -> "Subgraph":
        es = frozenset(eids)
        vs = set(vertices)
        for e in es:
            vs.update(g.edges[e])
        return Subgraph(frozenset(vs), es)

    @staticmethod
    def whole(g: Graph) -> "Subgraph":
        return Subgraph(frozenset(range(g.n)), frozenset(range(g.m)))

    def __or__(self, other: "Subgraph") -> "Subgraph":
        return Subgraph(self.vertices | other.vertices, self.edges | other.edges)

    def __and__(self, other: "Subgraph") -> "Subgraph":
        return Subgraph(self.vertices & other.vertices, self.edges & other.edges)

    def edge_mask(self) -> int:
        x = 0
        for e in self.edges:
            x |= 1 << e
        return x

    def components(self, g: Graph) -> list[frozenset]:
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for e in self.edges:
            a, b = find(g.edges[e][0]), find(g.edges[e][1])
            if a != b:
                parent[max(a, b)] = min(a, b)
        groups: dict[int, set] = {}
        for v in self.vertices:
            groups.setdefault(find(v), set()).add(v)
        return sorted((frozenset(x) for x in groups.values()), key=min)

    def restrict(self, g: Graph, vs: Iterable[int]) -> "Subgraph":
        s = frozenset(vs) & self.vertices
        return Subgraph(s, frozenset(e for e in self.edges if g.edges[e][0] in s and g.edges[e][1] in s))


def subgraph_dimension(g: Graph, h: Subgraph) -> int:
    return len(h.edges) - len(h.vertices) + len(h.components(g))


def _check_basis_of(g: Graph, h: Subgraph, fam: Sequence[int], name: str):
    mask = h.edge_mask()
    for i, x in enumerate(fam):
        if x & ~mask:
            raise CombinatorError(f"{name} member {i} uses an edge outside its subgraph")
        odd = odd_vertices(g, x)
        if odd:
            raise CombinatorError(f"{name} member {i} is not an F2-cycle: vertex {odd[0]} has odd degree")
    r, d = rank(fam), subgraph_dimension(g, h)
    if r != d:
        raise CombinatorError(f"{name} does not generate its subgraph: rank {r} < {d}")


def _path_mask(g: Graph, forest_adj: dict[int, list[tuple[int, int]]], a: int, b: int) -> int:
    """Edge mask of a BFS path a..b inside the given adjacency."""
    if a == b:
        return 0
    prev = {a: (None, None)}
    q = deque([a])
    while q:
        x = q.popleft()
        if x == b:
            break
        for w, e in forest_adj.get(x, ()):
            if w not in prev:
                prev[w] = (x, e)
                q.append(w)
    if b not in prev:
        raise CombinatorError(f"no forest path between {a} and {b}")
    mask = 0
    x = b
    while prev[x][0] is not None:
        mask |= 1 << prev[x][1]
        x = prev[x][0]
    return mask


def _forest_adj(g: Graph, eids: Iterable[int]) -> dict[int, list[tuple[int, int]]]:
    adj: dict[int, list[tuple[int, int]]] = {}
    for e in sorted(eids):
        u, v = g.edges[e]
        adj.setdefault(u, []).append((v, e))
        adj.setdefault(v, []).append((u, e))
    for lst in adj.values():
        lst.sort()
    return adj


def combine_union(g: Graph, gX: Subgraph, gY: Subgraph, bX, bY) -> BasisCertificate:
    """Union of bases of two subgraphs covering g with connected intersection.

    The intersection is required to be connected inside every component of g
    that it meets; on connected g this is plain connectivity.
    """
    bX, bY = _members(bX), _members(bY)
    whole = gX | gY
    if whole.edges != frozenset(range(g.m)) or whole.vertices != frozenset(range(g.n)):
        raise CombinatorError("gX and gY do not cover the graph")
    inter = gX & gY
    comp_of = {}
    for i, comp in enumerate(Subgraph.whole(g).components(g)):
        for v in comp:
            comp_of[v] = i
    seen = set()
    for comp in inter.components(g):
        c = comp_of[min(comp)]
        if c in seen:
            raise CombinatorError(f"intersection of gX and gY is disconnected (vertices {sorted(comp)[:5]} split off)")
        seen.add(c)
    _check_basis_of(g, gX, bX, "bX")
    _check_basis_of(g, gY, bY, "bY")
    claimed = congestion(bX, g.m) + congestion(bY, g.m)
    return make_certificate(g, bX + bY, claimed, ideal=claimed, note="union")


def star_family(g: Graph, v: int) -> list[int]:
    """Congestion-2 basis of F + star(v).

    F is a spanning forest of g - v plus one edge from v to each component,
    so G - v together with F has no new cycle.  Neighbours of v are grouped by
    the tree of F - v they lie in and sorted by DFS first visit (DFS from the
    smallest neighbour, children in id order); consecutive neighbours b_i,
    b_(i+1) give the cycle v b_i (tree path) b_(i+1) v.  Consecutive DFS paths
    follow an Euler tour, so each tree edge is used at most twice.
    """
    if not 0 <= v < g.n:
        raise CombinatorError(f"vertex {v} not in graph")
    minus = Graph(g.n, [e for e in g.edges if v not in e])
    fadj = _forest_adj(g, [g.edge_id(*minus.edges[e]) for e in spanning_forest(minus)])
    nbrs = set(g.neighbours(v))
    out = []
    placed: set[int] = set()
    for r in sorted(nbrs):
        if r in placed:
            continue
        order = []
        stack = [r]
        seen = {r}
        while stack:
            x = stack.pop()
            if x in nbrs:
                order.append(x)
            for w, _ in reversed(fadj.get(x, ())):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        placed.update(order)
        for a, b in zip(order, order[1:]):
            x = (1 << g.edge_id(v, a)) | (1 << g.edge_id(v, b)) | _path_mask(g, fadj, a, b)
            out.append(x)
    return out


def add_vertex(g: Graph, v: int, b_minus) -> BasisCertificate:
    """Basis of g from a basis of g - v (families over g's edge ids)."""
    if not 0 <= v < g.n:
        raise CombinatorError(f"vertex {v} not in graph")
    bm = _members(b_minus)
    vmask = 0
    for e in g.adjacency[v]:
        vmask |= 1 << e
    rest = Subgraph(frozenset(range(g.n)) - {v}, frozenset(range(g.m)) - set(g.adjacency[v]))
    _check_basis_of(g, rest, bm, "b_minus")
    star = star_family(g, v)
    claimed = congestion(bm, g.m) + 2
    cert = make_certificate(
        g, bm + star, claimed, ideal=claimed, note="add vertex",
        details={"star": star, "star_congestion": congestion(star, g.m)},
    )
    return cert


def apex_triangle_family(g: Graph, v: int) -> list[int]:
    """Triangles v a b for every edge ab of g - v; needs v adjacent to all vertices."""
    if set(g.neighbours(v)) != set(range(g.n)) - {v}:
        raise CombinatorError(f"vertex {v} is not an apex")
    out = []
    for e, (a, b) in enumerate(g.edges):
        if v in (a, b):
            continue
        out.append((1 << e) | (1 << g.edge_id(v, a)) | (1 << g.edge_id(v, b)))
    return out


def _peel(g: Graph, a: Sequence[int]) -> tuple[list[int], list[int]]:
    """Split A into (peeled, kept): peeled edges join components of G - A.

    Peeling repeats until every remaining edge of A has both ends in one
    component of G minus the remaining edges.
    """
    cur = sorted(set(a))
    peeled = []
    while True:
        rest = Subgraph.from_edges(g, set(range(g.m)) - set(cur), range(g.n))
        comp = {}
        for i, c in enumerate(rest.components(g)):
            for x in c:
                comp[x] = i
        hit = next((e for e in cur if comp[g.edges[e][0]] != comp[g.edges[e][1]]), None)
        if hit is None:
            return peeled, cur
        cur.remove(hit)
        peeled.append(hit)


def add_edges_fallback(g: Graph, a: Iterable[int], b_minus) -> BasisCertificate:
    """Basis of g from a basis of g - A by adding fundamental cycles of A.

    Edges of A joining components of g - A are peeled first (they create no
    cycle).  Claimed bound: congestion(b_minus) + |A|.
    """
    a = sorted(set(a))
    bm = _members(b_minus)
    rest = Subgraph.from_edges(g, set(range(g.m)) - set(a), range(g.n))
    _check_basis_of(g, rest, bm, "b_minus")
    peeled, kept = _peel(g, a)
    base = set(range(g.m)) - set(kept)
    # forest of g - kept, preferring edges of g - A so peeled bridges are used
    sub = Graph(g.n, [g.edges[e] for e in sorted(base)])
    F = {g.edge_id(*sub.edges[e]) for e in spanning_forest(sub)}
    fadj = _forest_adj(g, F)
    extra = [(1 << e) | _path_mask(g, fadj, *g.edges[e]) for e in kept]
    claimed = congestion(bm, g.m) + len(a)
    return make_certificate(
        g, bm + extra, claimed, ideal=None, note="add edges (fundamental-cycle fallback)",
        details={"peeled": peeled, "kept": kept, "ideal": "bn(G-A) + O(log^2 |A|)"},
    )


def delete_edge_graph(g: Graph, a: Iterable[int]) -> tuple[Graph, dict[int, int]]:
    """g - A with its own edge ids, plus the old -> new id map."""
    drop = set(a)
    keep = [e for e in range(g.m) if e not in drop]
    h = Graph(g.n, [g.edges[e] for e in keep])
    return h, {e: h.edge_id(*g.edges[e]) for e in keep}


def delete_edges(g: Graph, a: Iterable[int], b) -> BasisCertificate:
    """Basis of g - A from a basis of g by rerouting A-edges along paths of g - A.

    The certificate is hosted on ``delete_edge_graph(g, A)[0]``.
    """
    a = sorted(set(a))
    bm = _members(b)
    _check_basis_of(g, Subgraph.whole(g), bm, "b")
    h, emap = delete_edge_graph(g, a)
    peeled, kept = _peel(g, a)
    # replacement paths live in g - kept, which contains the peeled bridges
    avail = set(range(g.m)) - set(kept)
    adj = _forest_adj(g, avail)
    repl = {}
    for e in kept:
        u, v = g.edges[e]
        repl[e] = _path_mask(g, adj, u, v) ^ (1 << e)
    out = []
    amask = 0
    for e in a:
        amask |= 1 << e
    for C in bm:
        x = C
        for e in edge_ids(C & amask):
            if e in repl:
                x ^= repl[e]
        if x & amask:
            raise CombinatorError("internal error: rerouted cycle still uses a deleted edge")
        out.append(_reindex(x, emap))
    claimed = (len(a) + 1) * congestion(bm, g.m)
    fam = CycleFamily(h, out)
    try:
        pruned = prune_to_basis(fam).members
    except CycleSpaceError as exc:
        raise CombinatorError(f"rerouted family does not generate g - A: {exc}") from None
    return make_certificate(
        h, pruned, claimed, ideal=claimed, note="delete edges",
        details={"peeled": peeled, "kept": kept, "edge_map": emap},
    )


def _reindex(x: int, emap: dict[int, int]) -> int:
    y = 0
    for e in edge_ids(x):
        y |= 1 << emap[e]
    return y


def _separator_cut(g: Graph, F: set[int], terminals: Sequence[int]) -> list[int]:
    """Edges A of F such that the terminals lie in distinct components of F - A."""
    cut: list[int] = []
    terms = sorted(terminals)
    while True:
        fadj = _forest_adj(g, F - set(cut))
        found = None
        for i, s in enumerate(terms):
            for t in terms[i + 1 :]:
                try:
                    p = _path_mask(g, fadj, s, t)
                except CombinatorError:
                    continue
                found = min(edge_ids(p))
                break
            if found is not None:
                break
        if found is None:
            return cut
        cut.append(found)


def split_small_separator(g: Graph, sep: Separation, bX, bY) -> BasisCertificate:
    """Basis of g from bases of G[X] and G[Y] for a separation of order k.

    G_X = G[X] + F and G_Y = G[Y] + F for a spanning forest F; the k-1 forest
    edges separating X∩Y are re-added by the fundamental-cycle fallback, then
    the two sides are united along F.  Claimed: bX + bY + 2(k-1).
    """
    X, Y = frozenset(sep.X), frozenset(sep.Y)
    if X | Y != frozenset(range(g.n)):
        missing = sorted(frozenset(range(g.n)) - (X | Y))
        raise CombinatorError(f"not a separation: vertex {missing[0]} in neither side")
    for u, v in g.edges:
        if (u in X - Y and v in Y - X) or (v in X - Y and u in Y - X):
            raise CombinatorError(f"not a separation: edge {u}-{v} crosses")
    bX, bY = _members(bX), _members(bY)
    sX, sY = Subgraph.induced(g, X), Subgraph.induced(g, Y)
    _check_basis_of(g, sX, bX, "bX")
    _check_basis_of(g, sY, bY, "bY")
    k = len(X & Y)
    F = set(spanning_forest(g))
    A = _separator_cut(g, F, sorted(X & Y))
    fsub = Subgraph.from_edges(g, F, range(g.n))
    sides = []
    for side, base in ((sX, bX), (sY, bY)):
        gside = side | fsub
        # side as a standalone graph on the same vertex ids
        local = Graph(g.n, [g.edges[e] for e in sorted(gside.edges)])
        to_local = {e: local.edge_id(*g.edges[e]) for e in gside.edges}
        to_host = {v: k2 for k2, v in to_local.items()}
        a_local = [to_local[e] for e in A if e not in side.edges]
        cert = add_edges_fallback(local, a_local, [_reindex(x, to_local) for x in base])
        sides.append((gside, [_reindex(x, to_host) for x in cert.family.members]))
    (gX, fX), (gY, fY) = sides
    union = combine_union(g, gX, gY, fX, fY)
    claimed = congestion(bX, g.m) + congestion(bY, g.m) + 2 * max(k - 1, 0)
    return make_certificate(
        g, union.family.members, claimed, ideal=None, note="small separator",
        details={"k": k, "forest_cut": A, "ideal": "bn(G[X]) + bn(G[Y]) + O(log^2 k)"},
    )


def combine_components(g: Graph, gX: Subgraph, gY: Subgraph, bX, bY) -> BasisCertificate:
    """Iterated union over the components of gX, each meeting gY connectedly."""
    bX, bY = _members(bX), _members(bY)
    _check_basis_of(g, gX, bX, "bX")
    _check_basis_of(g, gY, bY, "bY")
    whole = gX | gY
    if whole.edges != frozenset(range(g.m)) or whole.vertices != frozenset(range(g.n)):
        raise CombinatorError("gX and gY do not cover the graph")
    acc_sub, acc_fam = gY, list(bY)
    for comp in gX.components(g):
        part = gX.restrict(g, comp)
        inter = part & gY
        if inter.vertices and len(inter.components(g)) != 1:
            raise CombinatorError(f"component of gX containing vertex {min(comp)} meets gY disconnectedly")
        mask = part.edge_mask()
        # members are split along components of gX; the parts stay F2-cycles
        acc_fam.extend(x & mask for x in bX if x & mask)
        acc_sub = acc_sub | part
    claimed = congestion(bX, g.m) + congestion(bY, g.m)
    return make_certificate(g, acc_fam, claimed, ideal=claimed, note="union over components")
