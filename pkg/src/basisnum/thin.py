"""Networks over hypergraphs: cutedges, zones, thinness witnesses, substitution.

Hyperedges are identified by their index in ``Hypergraph.hyperedges`` (the
multiset is a tuple, so parallel copies have distinct indices).  A hypergraph
path alternates vertices and hyperedge indices with no repetition of either.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

from .decomposition import Diagnostics, TreeDecomposition, hypertorso_of_prefix
from .graph import Graph
from .hypergraph import Hypergraph

__all__ = [
    "ThinError",
    "Network",
    "HyperPath",
    "Zones",
    "BagFamily",
    "PredicateFamily",
    "ThinnessWitness",
    "GrowResult",
    "cutedge_sequence",
    "classify_zones",
    "menger_two_paths",
    "check_hyper_pd",
    "check_thinness",
    "trivial_witness",
    "assemble_decomposition",
    "substitute",
    "grow_prefix",
    "network_to_dict",
    "network_from_dict",
    "witness_to_dict",
    "witness_from_dict",
]


class ThinError(ValueError):
    pass


Bags = list  # list of frozensets, left to right


@dataclass(frozen=True)
class Network:
    h: Hypergraph
    s: int
    t: int

    def __post_init__(self):
        if self.s not in self.h.vertices or self.t not in self.h.vertices:
            raise ThinError("source and sink must be vertices of the hypergraph")
        if len(self.h.components()) != 1:
            raise ThinError("network hypergraph is not connected")


@dataclass(frozen=True)
class HyperPath:
    vertices: tuple
    edges: tuple  # hyperedge indices; len(edges) == len(vertices) - 1


def _bfs_path(h: Hypergraph, s: int, t: int, banned: Iterable[int] = (), allowed: set | None = None) -> HyperPath | None:
    """Shortest s-t path using hyperedges not in ``banned`` (and in ``allowed`` if given)."""
    ban = set(banned)
    inc: dict[int, list[int]] = {v: [] for v in h.vertices}
    for i, e in enumerate(h.hyperedges):
        if i in ban or (allowed is not None and i not in allowed):
            continue
        for v in e:
            inc[v].append(i)
    prev: dict[int, tuple[int, int] | None] = {s: None}
    q = deque([s])
    while q:
        u = q.popleft()
        if u == t:
            vs, es = [t], []
            while prev[vs[-1]] is not None:
                p, i = prev[vs[-1]]
                es.append(i)
                vs.append(p)
            return HyperPath(tuple(reversed(vs)), tuple(reversed(es)))
        for i in inc[u]:
            for w in sorted(h.hyperedges[i]):
                if w not in prev:
                    prev[w] = (u, i)
                    q.append(w)
    return None


def cutedge_sequence(net: Network) -> list[int]:
    """Hyperedges on every s-t path, in the order they appear along any such path."""
    if net.s == net.t:
        return []
    p = _bfs_path(net.h, net.s, net.t)
    return [i for i in p.edges if _bfs_path(net.h, net.s, net.t, banned=[i]) is None]


@dataclass
class Zones:
    cutedges: list
    bridges: dict  # i -> list of components, i in 0..p
    appendices: dict  # i -> list of components, i in 1..p

    def V(self, i: int) -> frozenset:
        return frozenset().union(*self.bridges.get(i, []))

    def W(self, i: int) -> frozenset:
        return frozenset().union(*self.appendices.get(i, []))


def _ends(net: Network, cuts: Sequence[int]) -> list[frozenset]:
    return [frozenset({net.s})] + [net.h.hyperedges[i] for i in cuts] + [frozenset({net.t})]


def classify_zones(net: Network, cuts: Sequence[int] | None = None) -> Zones:
    """Split H minus the cutedges into (e_i, e_i+1)-bridges and e_i-appendices."""
    cuts = list(cutedge_sequence(net) if cuts is None else cuts)
    p = len(cuts)
    ends = _ends(net, cuts)
    cutset = set(cuts)
    rest = Hypergraph(net.h.vertices, tuple(e for i, e in enumerate(net.h.hyperedges) if i not in cutset))
    bridges: dict[int, list] = {i: [] for i in range(p + 1)}
    appendices: dict[int, list] = {i: [] for i in range(1, p + 1)}
    for comp in rest.components():
        touch = [i for i, e in enumerate(ends) if comp & e]
        if len(touch) == 2 and touch[1] == touch[0] + 1:
            bridges[touch[0]].append(comp)
        elif len(touch) == 1 and 1 <= touch[0] <= p:
            appendices[touch[0]].append(comp)
        else:
            raise ThinError(f"component containing vertex {min(comp)} touches {touch}: not a network zone")
    return Zones(cuts, bridges, appendices)


def menger_two_paths(net: Network) -> tuple[HyperPath, HyperPath]:
    """Two s-t paths sharing exactly the cutedges.

    A flow of value 2 on the vertex/hyperedge incidence structure, with
    hyperedge capacity 2 on cutedges and 1 elsewhere, is split into two walks;
    each walk is shortened to a shortest path over its own hyperedges.
    """
    h, s, t = net.h, net.s, net.t
    cuts = cutedge_sequence(net)
    if s == t:
        p = HyperPath((s,), ())
        return p, p
    # nodes: ("v", x), ("in", i), ("out", i)
    cap: dict = {}
    adj: dict = {}

    def arc(a, b, c):
        cap[(a, b)] = cap.get((a, b), 0) + c
        cap.setdefault((b, a), 0)
        adj.setdefault(a, set()).add(b)
        adj.setdefault(b, set()).add(a)

    cutset = set(cuts)
    for i, e in enumerate(h.hyperedges):
        arc(("in", i), ("out", i), 2 if i in cutset else 1)
        for x in e:
            arc(("v", x), ("in", i), 2)
            arc(("out", i), ("v", x), 2)
    src, dst = ("v", s), ("v", t)
    flow = 0
    while flow < 2:
        prev = {src: None}
        q = deque([src])
        while q and dst not in prev:
            a = q.popleft()
            for b in sorted(adj.get(a, ())):
                if b not in prev and cap[(a, b)] > 0:
                    prev[b] = a
                    q.append(b)
        if dst not in prev:
            break
        b = dst
        while prev[b] is not None:
            a = prev[b]
            cap[(a, b)] -= 1
            cap[(b, a)] += 1
            b = a
        flow += 1
    if flow < 2:
        raise ThinError(f"internal error: flow value {flow} < 2 in a connected network")
    # net flow on the hyperedge arcs
    used = {}
    for i in range(len(h.hyperedges)):
        c0 = 2 if i in cutset else 1
        used[i] = c0 - cap[(("in", i), ("out", i))]
    pos: dict = {}
    for (a, b), c in cap.items():
        if a[0] == "v" and b[0] == "in":
            f = 2 - c
            if f > 0:
                pos[(a, b)] = f
        elif a[0] == "out" and b[0] == "v":
            f = 2 - c
            if f > 0:
                pos[(a, b)] = f
    # cancel opposite flows vertex->in / out->vertex is not needed: arcs are one-way
    out_arcs: dict = {}
    for (a, b), f in sorted(pos.items()):
        out_arcs.setdefault(a, []).append(b)
    paths = []
    for _ in range(2):
        edges_used = set()
        cur = src
        steps = 0
        while cur != dst:
            nxt = next((b for b in out_arcs.get(cur, []) if pos.get((cur, b), 0) > 0), None)
            if nxt is None:
                raise ThinError("internal error: flow decomposition got stuck")
            pos[(cur, nxt)] -= 1
            if nxt[0] == "in":
                edges_used.add(nxt[1])
                out = ("out", nxt[1])
                cur = out
            else:
                cur = nxt
            steps += 1
        p = _bfs_path(h, s, t, allowed=edges_used)
        if p is None:
            raise ThinError("internal error: walk does not contain a path")
        paths.append(p)
    p1, p2 = paths
    shared = set(p1.edges) & set(p2.edges)
    if shared != cutset:
        raise ThinError(f"internal error: paths share {sorted(shared)} but cutedges are {sorted(cutset)}")
    return p1, p2


# families of allowed bags ---------------------------------------------------------

class BagFamily:
    """Downwards-closed family: all subsets of some bag."""

    def __init__(self, bags: Iterable[Iterable[int]]):
        self.bags = [frozenset(b) for b in bags]
        self._masks = [sum(1 << v for v in b) for b in self.bags]

    def contains(self, s: Iterable[int]) -> bool:
        m = sum(1 << v for v in set(s))
        return m == 0 or any(m & ~b == 0 for b in self._masks)

    def contains_plus(self, s: Iterable[int], k: int) -> bool:
        # U \ A inside a bag B for some |A| <= k  iff  |U \ B| <= k for some B
        m = sum(1 << v for v in set(s))
        if m.bit_count() <= k:
            return True
        return any((m & ~b).bit_count() <= k for b in self._masks)


class PredicateFamily:
    """Downwards-closed family given by a membership predicate.

    The +k test is an exact search over deletion sets; it refuses sets with
    more than ``exact_limit`` elements.
    """

    def __init__(self, pred, exact_limit: int = 20):
        self.pred = pred
        self.exact_limit = exact_limit

    def contains(self, s: Iterable[int]) -> bool:
        return bool(self.pred(frozenset(s)))

    def contains_plus(self, s: Iterable[int], k: int) -> bool:
        u = sorted(set(s))
        if len(u) > self.exact_limit:
            raise ThinError(f"set of size {len(u)} exceeds the exact +k search limit {self.exact_limit}")
        for r in range(min(k, len(u)) + 1):
            for a in combinations(u, r):
                if self.pred(frozenset(u) - frozenset(a)):
                    return True
        return False


@dataclass
class ThinnessWitness:
    cutedges: list
    bridge_pds: dict  # i in 0..p -> bags of a path-decomposition of H[V_i]
    appendix_pds: dict  # i in 1..p -> bags of a path-decomposition of H[W_i]


def check_hyper_pd(h: Hypergraph, bags: Sequence[Iterable[int]]) -> Diagnostics:
    """Path-decomposition of a hypergraph: cover, hyperedges in bags, contiguity."""
    bags = [frozenset(b) for b in bags]
    if not bags:
        return Diagnostics(False, "empty", None, "path-decomposition has no bags")
    for i, b in enumerate(bags):
        if not b <= h.vertices:
            x = min(b - h.vertices)
            return Diagnostics(False, "T1", x, f"bag {i} contains {x}, outside the hypergraph")
    for v in sorted(h.vertices):
        idx = [i for i, b in enumerate(bags) if v in b]
        if not idx:
            return Diagnostics(False, "T1", v, f"vertex {v} lies in no bag")
        if idx[-1] - idx[0] + 1 != len(idx):
            return Diagnostics(False, "T3", v, f"bags containing vertex {v} are not consecutive")
    for j, e in enumerate(h.hyperedges):
        if not any(e <= b for b in bags):
            return Diagnostics(False, "T2", j, f"hyperedge {sorted(e)} lies in no bag")
    return Diagnostics(True)


def _adhesion(bags: Sequence[frozenset]) -> int:
    return max((len(a & b) for a, b in zip(bags, bags[1:])), default=0)


def check_thinness(net: Network, w: ThinnessWitness, k: int, family) -> Diagnostics:
    """Check every clause of (V,k)-thinness; report the first violation."""
    h = net.h
    for i, e in enumerate(h.hyperedges):
        if len(e) > k:
            return Diagnostics(False, "size", i, f"hyperedge {i} has size {len(e)}, not at most k = {k}")
    cuts = cutedge_sequence(net)
    if list(w.cutedges) != cuts:
        return Diagnostics(False, "cutedges", cuts, f"witness cutedges {list(w.cutedges)} != {cuts}")
    z = classify_zones(net, cuts)
    p = len(cuts)
    ends = _ends(net, cuts)
    for i in range(p + 1):
        Vi = z.V(i)
        bags = [frozenset(b) for b in w.bridge_pds.get(i, [])]
        where = f"bridge zone V_{i}"
        d = check_hyper_pd(h.induced(Vi), bags)
        if not d.ok:
            return Diagnostics(False, "a:pd", i, f"{where}: {d.message}")
        if _adhesion(bags) > 2 * k:
            return Diagnostics(False, "a:adhesion", i, f"{where}: adhesion {_adhesion(bags)} > 2k = {2 * k}")
        if not (Vi & ends[i]) <= bags[0]:
            return Diagnostics(False, "a:left", i, f"{where}: leftmost bag misses V_{i}∩e_{i} = {sorted(Vi & ends[i])}")
        if not (Vi & ends[i + 1]) <= bags[-1]:
            return Diagnostics(
                False, "a:right", i, f"{where}: rightmost bag misses V_{i}∩e_{i + 1} = {sorted(Vi & ends[i + 1])}"
            )
        for j, b in enumerate(bags):
            if not family.contains_plus(b, k):
                return Diagnostics(False, "a:bags", (i, j), f"{where}: bag {j} is not in V^+k")
    for i in range(1, p + 1):
        Wi = z.W(i)
        bags = [frozenset(b) for b in w.appendix_pds.get(i, [])]
        where = f"appendix zone W_{i}"
        d = check_hyper_pd(h.induced(Wi), bags)
        if not d.ok:
            return Diagnostics(False, "b:pd", i, f"{where}: {d.message}")
        if _adhesion(bags) > k:
            return Diagnostics(False, "b:adhesion", i, f"{where}: adhesion {_adhesion(bags)} > k = {k}")
        if not (Wi & ends[i]) <= bags[0]:
            return Diagnostics(False, "b:left", i, f"{where}: leftmost bag misses W_{i}∩e_{i} = {sorted(Wi & ends[i])}")
        for j, b in enumerate(bags):
            if not family.contains(b):
                return Diagnostics(False, "b:bags", (i, j), f"{where}: bag {j} is not in V")
    return Diagnostics(True)


def trivial_witness(net: Network) -> ThinnessWitness:
    """One bag per zone; valid when V(H) itself belongs to the family."""
    z = classify_zones(net)
    p = len(z.cutedges)
    return ThinnessWitness(
        list(z.cutedges),
        {i: [z.V(i)] for i in range(p + 1)},
        {i: [z.W(i)] for i in range(1, p + 1)},
    )


def assemble_decomposition(net: Network, w: ThinnessWitness) -> list[frozenset]:
    """Path-decomposition of the whole network from a thinness witness.

    Bridge decompositions alternate with appendix decompositions of W_i that
    carry e_i in every bag.
    """
    h = net.h
    out: list[frozenset] = [frozenset(b) for b in w.bridge_pds[0]]
    for i, c in enumerate(w.cutedges, start=1):
        e = h.hyperedges[c]
        out += [frozenset(b) | e for b in w.appendix_pds[i]]
        out += [frozenset(b) for b in w.bridge_pds[i]]
    return _clean(out)


def _clean(bags: Iterable[Iterable[int]]) -> list[frozenset]:
    out = [frozenset(b) for b in bags if b]
    return out or [frozenset()]


def _restrict(bags: Iterable[frozenset], xs: frozenset) -> list[frozenset]:
    return _clean(b & xs for b in bags)


def substitute(net: Network, e: int, kgraph: Hypergraph, w: ThinnessWitness, k: int, family) -> tuple[Network, ThinnessWitness]:
    """Replace cutedge ``e`` by the hypergraph K and rebuild a thinness witness.

    New hyperedge indices: those of H without ``e`` (order kept), then those of K.
    The returned witness is re-checked before it is returned.
    """
    h = net.h
    d = check_thinness(net, w, k, family)
    if not d.ok:
        raise ThinError(f"input witness fails: {d.message}")
    cuts = list(w.cutedges)
    if e not in cuts:
        raise ThinError(f"hyperedge {e} is not a cutedge")
    ee = h.hyperedges[e]
    if h.vertices & kgraph.vertices != ee:
        raise ThinError("V(H) ∩ V(K) must equal the substituted hyperedge")
    if not family.contains(kgraph.vertices):
        raise ThinError("V(K) is not in the family")
    big = [i for i, f in enumerate(kgraph.hyperedges) if len(f) > k]
    if big:
        raise ThinError(f"hyperedge {big[0]} of K has size > k")
    ell = cuts.index(e) + 1  # 1-based position of e

    mh = len(h.hyperedges) - 1
    hmap = {i: (i if i < e else i - 1) for i in range(len(h.hyperedges)) if i != e}
    new_h = Hypergraph(h.vertices | kgraph.vertices, tuple(x for i, x in enumerate(h.hyperedges) if i != e) + kgraph.hyperedges)
    new = Network(new_h, net.s, net.t)
    new_cuts = cutedge_sequence(new)
    before = [hmap[c] for c in cuts[: ell - 1]]
    after = [hmap[c] for c in cuts[ell:]]
    if new_cuts[: len(before)] != before or new_cuts[len(new_cuts) - len(after):] != after:
        raise ThinError("internal error: cutedge sequence is not of the expected form")
    fs = new_cuts[len(before): len(new_cuts) - len(after)]
    if any(f < mh for f in fs):
        raise ThinError("internal error: new cutedge outside K")
    q = len(fs)
    z = classify_zones(new, new_cuts)
    VK = frozenset(kgraph.vertices)
    P = [frozenset(b) for b in w.appendix_pds[ell]]  # H[W_ell]
    P_prime = _clean([VK] + P)  # decomposition of Ĥ[W_ell ∪ V(K)]

    bridges: dict[int, list] = {}
    apps: dict[int, list] = {}
    for i in range(ell - 1):
        bridges[i] = list(w.bridge_pds[i])
    for i in range(ell + 1, len(cuts) + 1):
        bridges[i - 1 + q] = list(w.bridge_pds[i])
    for i in range(1, ell):
        apps[i] = list(w.appendix_pds[i])
    for i in range(ell + 1, len(cuts) + 1):
        apps[i - 1 + q] = list(w.appendix_pds[i])
    base = ell - 1
    P1 = [frozenset(b) for b in w.bridge_pds[ell - 1]]
    P3 = [frozenset(b) for b in w.bridge_pds[ell]]
    if q == 0:
        X0 = z.V(base)
        P2 = [b | ee for b in P]
        bridges[base] = _restrict(P1 + P2 + [VK] + P3, X0)
    else:
        f = [new_h.hyperedges[c] for c in fs]
        X0 = z.V(base)
        bridges[base] = _restrict(P1 + [b | f[0] for b in P_prime], X0)
        for j in range(1, q):
            Xj = z.V(base + j)
            bridges[base + j] = [b | (f[j] & Xj) for b in _restrict(P_prime, Xj)]
        Xq = z.V(base + q)
        bridges[base + q] = _restrict([b | f[q - 1] for b in reversed(P_prime)] + P3, Xq)
        for j in range(1, q + 1):
            apps[base + j] = _restrict(P_prime, z.W(base + j))
    out = ThinnessWitness(new_cuts, bridges, apps)
    d = check_thinness(new, out, k, family)
    if not d.ok:
        raise ThinError(f"internal error: substituted witness fails clause {d.condition}: {d.message}")
    return new, out


# prefix growing ------------------------------------------------------------------

@dataclass
class GrowResult:
    prefix: list
    decomposition: list  # bags of a path-decomposition of hypertorso(T, Z)
    p1: HyperPath
    p2: HyperPath
    network: Network
    witness: ThinnessWitness
    labels: list  # per hyperedge: None for a graph edge, else the node whose adhesion it is
    trace: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "prefix": self.prefix,
            "decomposition": [sorted(b) for b in self.decomposition],
            "P1": {"vertices": list(self.p1.vertices), "hyperedges": [sorted(self.network.h.hyperedges[i]) for i in self.p1.edges]},
            "P2": {"vertices": list(self.p2.vertices), "hyperedges": [sorted(self.network.h.hyperedges[i]) for i in self.p2.edges]},
            "trace": self.trace,
        }


def _multiset(h: Hypergraph) -> list:
    return sorted(tuple(sorted(e)) for e in h.hyperedges)


def grow_prefix(g: Graph, td: TreeDecomposition, u: int, v: int, k: int | None = None) -> GrowResult:
    """Grow a prefix Z until two u-v paths of its hypertorso share no adhesion hyperedge.

    The network of the current prefix is kept (V,k)-thin, with V the subsets
    of bags; the invariant is checked at every iteration.
    """
    root = td.root
    if u not in td.bags[root] or v not in td.bags[root]:
        raise ThinError("u and v must lie in the root bag")
    if k is None:
        k = max(2, max((len(td.adhesion(t)) for t in td.parent if td.parent[t] is not None), default=0))
    family = BagFamily(td.bags.values())
    Z = [root]
    h0 = hypertorso_of_prefix(g, td, Z)
    nedges = len(g.edge_subgraph_ids(td.bags[root]))
    children = [t for t in td.preorder if td.parent[t] == root]
    labels: list = [None] * nedges + children
    net = Network(h0, u, v)
    w = trivial_witness(net)
    trace = []
    while True:
        d = check_thinness(net, w, k, family)
        trace.append({"prefix": sorted(Z), "thin": d.ok, "cutedges": len(w.cutedges)})
        if not d.ok:
            raise ThinError(f"loop invariant broken at prefix {sorted(Z)}: {d.message}")
        p1, p2 = menger_two_paths(net)
        shared = [i for i in w.cutedges if labels[i] is not None and i in p1.edges and i in p2.edges]
        if not shared:
            break
        e = shared[0]
        z = labels[e]
        ee = net.h.hyperedges[e]
        # hypertorso of z, minus graph edges inside the adhesion (already present)
        kid = [c for c in td.preorder if td.parent[c] == z]
        kh = [frozenset(g.edges[i]) for i in g.edge_subgraph_ids(td.bags[z])]
        kh = [x for x in kh if not x <= ee]
        K = Hypergraph(frozenset(td.bags[z]), tuple(kh) + tuple(td.adhesion(c) for c in kid))
        net, w = substitute(net, e, K, w, k, family)
        labels = [x for i, x in enumerate(labels) if i != e] + [None] * len(kh) + kid
        Z.append(z)
        if _multiset(net.h) != _multiset(hypertorso_of_prefix(g, td, Z)):
            raise ThinError(f"internal error: substituted network differs from the hypertorso of {sorted(Z)}")
    pd = assemble_decomposition(net, w)
    dd = check_hyper_pd(net.h, pd)
    if not dd.ok:
        raise ThinError(f"assembled decomposition fails: {dd.message}")
    if _adhesion(pd) > 2 * k:
        raise ThinError(f"assembled decomposition has adhesion {_adhesion(pd)} > 2k")
    bad = [b for b in pd if not family.contains_plus(b, k)]
    if bad:
        raise ThinError(f"assembled bag {sorted(bad[0])} is not in V^+k")
    eset = {i for i, x in enumerate(labels) if x is not None}
    if eset & set(p1.edges) & set(p2.edges):
        raise ThinError("internal error: final paths share an adhesion hyperedge")
    return GrowResult(sorted(Z), pd, p1, p2, net, w, labels, trace)


# JSON ------------------------------------------------------------------------------

def network_to_dict(net: Network) -> dict:
    return {
        "vertices": sorted(net.h.vertices),
        "hyperedges": [sorted(e) for e in net.h.hyperedges],
        "source": net.s,
        "sink": net.t,
    }


def network_from_dict(d: dict | str) -> Network:
    if isinstance(d, str):
        d = json.loads(d)
    return Network(Hypergraph.build(d["vertices"], d["hyperedges"]), d["source"], d["sink"])


def witness_to_dict(w: ThinnessWitness) -> dict:
    return {
        "cutedges": list(w.cutedges),
        "bridges": {str(i): [sorted(b) for b in bags] for i, bags in sorted(w.bridge_pds.items())},
        "appendices": {str(i): [sorted(b) for b in bags] for i, bags in sorted(w.appendix_pds.items())},
    }


def witness_from_dict(d: dict | str) -> ThinnessWitness:
    if isinstance(d, str):
        d = json.loads(d)
    return ThinnessWitness(
        list(d["cutedges"]),
        {int(i): [frozenset(b) for b in bags] for i, bags in d["bridges"].items()},
        {int(i): [frozenset(b) for b in bags] for i, bags in d["appendices"].items()},
    )
