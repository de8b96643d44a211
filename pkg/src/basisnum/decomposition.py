"""Rooted tree-decompositions: derived views, validation, saneness, quotients."""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from .graph import Graph, connected_components
from .hypergraph import Hypergraph

__all__ = [
    "TreeDecomposition",
    "PathDecomposition",
    "Diagnostics",
    "validate",
    "width_and_adhesion",
    "is_sane",
    "make_sane",
    "quotient",
    "hypertorso_of_prefix",
    "td_from_json",
    "td_to_json",
]


class TreeDecomposition:
    """Rooted tree with bags.  ``parent[root]`` is None."""

    def __init__(self, parent: Mapping[int, int | None], bags: Mapping[int, Iterable[int]]):
        self.parent: dict[int, int | None] = dict(parent)
        self.bags: dict[int, frozenset] = {t: frozenset(b) for t, b in bags.items()}
        if set(self.parent) != set(self.bags):
            raise ValueError("parent and bag maps have different node sets")
        roots = [t for t, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise ValueError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        for t, p in self.parent.items():
            if p is not None and p not in self.parent:
                raise ValueError(f"node {t} has unknown parent {p}")
        if len(self.preorder) != len(self.parent):
            raise ValueError("parent map does not form a tree")

    @staticmethod
    def from_nodes(nodes: Iterable[tuple[int, int | None, Iterable[int]]]) -> "TreeDecomposition":
        par, bags = {}, {}
        for t, p, b in nodes:
            par[t] = p
            bags[t] = b
        return TreeDecomposition(par, bags)

    @cached_property
    def children(self) -> dict[int, list[int]]:
        ch: dict[int, list[int]] = {t: [] for t in self.parent}
        for t, p in self.parent.items():
            if p is not None:
                ch[p].append(t)
        for v in ch.values():
            v.sort()
        return ch

    @cached_property
    def preorder(self) -> list[int]:
        out = []
        stack = [self.root]
        seen = set()
        while stack:
            t = stack.pop()
            if t in seen:
                break
            seen.add(t)
            out.append(t)
            stack.extend(reversed(self.children[t]))
        return out

    @property
    def nodes(self) -> list[int]:
        return self.preorder

    def depth(self, t: int) -> int:
        d = 0
        while self.parent[t] is not None:
            t = self.parent[t]
            d += 1
        return d

    def ancestors(self, t: int) -> list[int]:
        """t and its ancestors, from t up to the root."""
        out = [t]
        while self.parent[out[-1]] is not None:
            out.append(self.parent[out[-1]])
        return out

    @cached_property
    def _subtrees(self) -> dict[int, list[int]]:
        sub: dict[int, list[int]] = {}
        for t in reversed(self.preorder):
            s = [t]
            for c in self.children[t]:
                s.extend(sub[c])
            sub[t] = s
        return sub

    def subtree(self, t: int) -> list[int]:
        return self._subtrees[t]

    def adhesion(self, t: int) -> frozenset:
        p = self.parent[t]
        return frozenset() if p is None else self.bags[t] & self.bags[p]

    def margin(self, t: int) -> frozenset:
        return self.bags[t] - self.adhesion(t)

    def component(self, t: int) -> frozenset:
        out: set = set()
        for s in self.subtree(t):
            out |= self.margin(s)
        return frozenset(out)

    def vertices(self) -> frozenset:
        out: set = set()
        for b in self.bags.values():
            out |= b
        return frozenset(out)

    def torso_edges(self, g: Graph, t: int) -> set[tuple[int, int]]:
        """Edges (in G's vertex ids) of the torso at t."""
        bag = self.bags[t]
        es = {g.edges[e] for e in g.edge_subgraph_ids(bag)}
        for a in [self.adhesion(t)] + [self.adhesion(c) for c in self.children[t]]:
            for u, v in combinations(sorted(a), 2):
                es.add((u, v))
        return es

    def torso(self, g: Graph, t: int) -> tuple[Graph, list[int]]:
        """Torso at t relabelled to 0..|bag|-1, plus local -> G vertex map."""
        vs = sorted(self.bags[t])
        pos = {v: i for i, v in enumerate(vs)}
        es = [(pos[u], pos[v]) for u, v in self.torso_edges(g, t)]
        return Graph(len(vs), es), vs

    def marginal(self, g: Graph, t: int) -> tuple[Graph, list[int]]:
        """Torso at t with the adhesion of t deleted."""
        vs = sorted(self.margin(t))
        pos = {v: i for i, v in enumerate(vs)}
        es = [(pos[u], pos[v]) for u, v in self.torso_edges(g, t) if u in pos and v in pos]
        return Graph(len(vs), es), vs

    def all_adhesion_pairs(self) -> set[tuple[int, int]]:
        out = set()
        for t in self.parent:
            out.update(combinations(sorted(self.adhesion(t)), 2))
        return out

    def renumbered(self) -> "TreeDecomposition":
        """Copy with ids 0..N-1 assigned in DFS preorder."""
        new = {t: i for i, t in enumerate(self.preorder)}
        return TreeDecomposition(
            {new[t]: (None if p is None else new[p]) for t, p in self.parent.items()},
            {new[t]: b for t, b in self.bags.items()},
        )

    def to_dict(self) -> dict:
        return {
            "root": self.root,
            "nodes": [
                {"id": t, "parent": self.parent[t], "bag": sorted(self.bags[t])}
                for t in self.preorder
            ],
        }

    def __eq__(self, other):
        return isinstance(other, TreeDecomposition) and self.parent == other.parent and self.bags == other.bags

    def __repr__(self):
        return f"TreeDecomposition({len(self.parent)} nodes, root={self.root})"


class PathDecomposition(TreeDecomposition):
    """Path-shaped decomposition; node i has bag ``bag_list[i]`` and parent i-1."""

    def __init__(self, bag_list: Sequence[Iterable[int]]):
        if not bag_list:
            bag_list = [()]
        self.bag_list = [frozenset(b) for b in bag_list]
        n = len(self.bag_list)
        super().__init__({i: (i - 1 if i else None) for i in range(n)}, dict(enumerate(self.bag_list)))

    @property
    def leftmost(self) -> frozenset:
        return self.bag_list[0]

    @property
    def rightmost(self) -> frozenset:
        return self.bag_list[-1]

    def __len__(self):
        return len(self.bag_list)

    def restrict(self, vs: Iterable[int]) -> "PathDecomposition":
        s = frozenset(vs)
        return PathDecomposition([b & s for b in self.bag_list])


def td_to_json(td: TreeDecomposition) -> str:
    return json.dumps(td.to_dict())


def td_from_json(text: str | dict) -> TreeDecomposition:
    d = json.loads(text) if isinstance(text, str) else text
    td = TreeDecomposition.from_nodes((n["id"], n["parent"], n["bag"]) for n in d["nodes"])
    if "root" in d and d["root"] != td.root:
        raise ValueError(f"declared root {d['root']} is not the parentless node {td.root}")
    return td


@dataclass
class Diagnostics:
    ok: bool
    condition: str | None = None
    witness: object = None
    message: str = "ok"

    def __bool__(self):
        return self.ok


def validate(g: Graph, td: TreeDecomposition) -> Diagnostics:
    covered = td.vertices()
    for v in range(g.n):
        if v not in covered:
            return Diagnostics(False, "T1", v, f"T1: vertex {v} lies in no bag")
    extra = sorted(covered - set(range(g.n)))
    if extra:
        return Diagnostics(False, "T1", extra[0], f"T1: bag vertex {extra[0]} is not a vertex of the graph")
    for u, v in g.edges:
        if not any(u in b and v in b for b in td.bags.values()):
            return Diagnostics(False, "T2", (u, v), f"T2: edge {u}-{v} lies in no bag")
    for v in range(g.n):
        nodes = [t for t in td.preorder if v in td.bags[t]]
        # connected iff exactly one node of the trace has its parent outside it
        tops = [t for t in nodes if td.parent[t] is None or v not in td.bags[td.parent[t]]]
        if len(tops) != 1:
            return Diagnostics(False, "T3", v, f"T3: nodes containing vertex {v} are not connected ({tops})")
    return Diagnostics(True)


def width_and_adhesion(td: TreeDecomposition) -> tuple[int, int]:
    width = max(len(b) for b in td.bags.values()) - 1
    adh = max(len(td.adhesion(t)) for t in td.parent)
    return width, adh


def is_sane(g: Graph, td: TreeDecomposition) -> Diagnostics:
    for t in td.preorder:
        if not td.margin(t):
            return Diagnostics(False, "margin", t, f"node {t} has empty margin")
        comp = td.component(t)
        if len(connected_components(g, comp)) != 1:
            return Diagnostics(False, "component", t, f"component of node {t} is disconnected")
        for v in td.adhesion(t):
            if not any(w in comp for w in g.neighbours(v)):
                return Diagnostics(False, "adhesion", (t, v), f"adhesion vertex {v} of node {t} has no neighbour in its component")
    return Diagnostics(True)


# saneness ----------------------------------------------------------------------

class _Mutable:
    def __init__(self, td: TreeDecomposition):
        self.parent = dict(td.parent)
        self.bags = {t: set(b) for t, b in td.bags.items()}
        self.next_id = max(self.parent) + 1

    def freeze(self) -> TreeDecomposition:
        return TreeDecomposition(self.parent, self.bags)


def _remove_empty_margins(td: TreeDecomposition) -> TreeDecomposition | None:
    for t in td.preorder:
        if td.margin(t):
            continue
        mt = _Mutable(td)
        p = mt.parent.pop(t)
        del mt.bags[t]
        kids = td.children[t]
        if p is None:
            if not kids:
                return None
            p = kids[0]
            mt.parent[p] = None
            kids = kids[1:]
        for c in kids:
            mt.parent[c] = p
        return mt.freeze()
    return None


def _split_components(g: Graph, td: TreeDecomposition) -> TreeDecomposition | None:
    for t in td.preorder:
        comps = connected_components(g, td.component(t))
        if len(comps) <= 1:
            continue
        mt = _Mutable(td)
        sub = td.subtree(t)
        adh = td.adhesion(t)
        for s in sub:
            del mt.parent[s]
            del mt.bags[s]
        for comp in comps:
            keep = set(comp) | adh
            idmap = {}
            for s in sub:
                idmap[s] = mt.next_id
                mt.next_id += 1
            for s in sub:
                p = td.parent[s]
                mt.parent[idmap[s]] = idmap[p] if s != t else p
                mt.bags[idmap[s]] = td.bags[s] & keep
        if td.parent[t] is None:
            # several roots: hang later copies below the first one
            roots = [r for r, p in mt.parent.items() if p is None]
            for r in roots[1:]:
                mt.parent[r] = roots[0]
        return mt.freeze()
    return None


def _shrink_adhesions(g: Graph, td: TreeDecomposition) -> TreeDecomposition | None:
    for t in td.preorder:
        comp = td.component(t)
        drop = {v for v in td.adhesion(t) if not any(w in comp for w in g.neighbours(v))}
        if not drop:
            continue
        mt = _Mutable(td)
        for s in td.subtree(t):
            mt.bags[s] -= drop
        return mt.freeze()
    return None


def make_sane(g: Graph, td: TreeDecomposition) -> TreeDecomposition:
    """Fixpoint of: drop empty-margin nodes, split disconnected components, shrink adhesions."""
    if len(connected_components(g)) > 1:
        raise ValueError("make_sane requires a connected graph")
    cur = td
    while True:
        for step in (_remove_empty_margins, lambda x: _split_components(g, x), lambda x: _shrink_adhesions(g, x)):
            nxt = step(cur)
            if nxt is not None:
                cur = nxt
                break
        else:
            return cur.renumbered()


def quotient(td: TreeDecomposition, x: Iterable[int]) -> TreeDecomposition:
    xs = set(x)
    if td.root not in xs:
        raise ValueError("quotient node set must contain the root")
    if not xs <= set(td.parent):
        raise ValueError("quotient node set has unknown nodes")
    bags: dict[int, set] = {t: set() for t in xs}
    for s in td.preorder:
        a = next(a for a in td.ancestors(s) if a in xs)
        bags[a] |= td.bags[s]
    par = {}
    for t in xs:
        p = td.parent[t]
        par[t] = None if p is None else next(a for a in td.ancestors(p) if a in xs)
    return TreeDecomposition(par, bags)


def hypertorso_of_prefix(g: Graph, td: TreeDecomposition, z: Iterable[int]) -> Hypergraph:
    zs = set(z)
    if td.root not in zs:
        raise ValueError("a prefix must contain the root")
    for t in zs:
        p = td.parent[t]
        if p is not None and p not in zs:
            raise ValueError(f"not a prefix: node {t} in Z but its parent {p} is not")
    vs: set = set()
    for t in zs:
        vs |= td.bags[t]
    hs = [frozenset(g.edges[e]) for e in g.edge_subgraph_ids(vs)]
    for t in td.preorder:
        if t not in zs and td.parent[t] in zs:
            hs.append(td.adhesion(t))
    return Hypergraph.build(vs, hs)
