"""Hypergraphs whose hyperedges form a multiset (a list of frozensets)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


@dataclass(frozen=True)
class Hypergraph:
    vertices: frozenset
    hyperedges: tuple  # tuple[frozenset, ...], repetitions allowed

    @staticmethod
    def build(vertices: Iterable[int], hyperedges: Iterable[Iterable[int]]) -> "Hypergraph":
        vs = frozenset(vertices)
        hs = tuple(frozenset(h) for h in hyperedges)
        for i, h in enumerate(hs):
            if not h <= vs:
                raise ValueError(f"hyperedge {i} uses vertices outside the vertex set")
        return Hypergraph(vs, hs)

    def incident(self, v: int) -> list[int]:
        return [i for i, h in enumerate(self.hyperedges) if v in h]

    def induced(self, vs: Iterable[int]) -> "Hypergraph":
        """H[X]: keep hyperedges contained in X."""
        s = frozenset(vs)
        return Hypergraph(s, tuple(h for h in self.hyperedges if h <= s))

    def multiplicity(self, h: Iterable[int]) -> int:
        h = frozenset(h)
        return sum(1 for x in self.hyperedges if x == h)

    def max_edge_size(self) -> int:
        return max((len(h) for h in self.hyperedges), default=0)

    def components(self, vs: Iterable[int] | None = None) -> list[frozenset]:
        """Connected components of the sub-hypergraph induced on ``vs``."""
        allowed = set(self.vertices if vs is None else vs)
        parent = {v: v for v in allowed}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for h in self.hyperedges:
            if h <= allowed and h:
                it = iter(h)
                a = find(next(it))
                for b in it:
                    rb = find(b)
                    if rb != a:
                        parent[rb] = a
        groups: dict[int, set] = {}
        for v in allowed:
            groups.setdefault(find(v), set()).add(v)
        return sorted((frozenset(g) for g in groups.values()), key=min)
