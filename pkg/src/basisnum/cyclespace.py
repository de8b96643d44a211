"""GF(2) cycle space over edge ids: vectors are Python int bitsets."""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .graph import Graph, connected_components, shortest_path, spanning_forest

__all__ = [
    "CycleSpaceError",
    "CycleFamily",
    "BasisCertificate",
    "edge_vector",
    "edge_ids",
    "odd_vertices",
    "is_f2_cycle",
    "cycle_space_dimension",
    "rank",
    "generates_cycle_space",
    "congestion",
    "edge_loads",
    "prune_to_basis",
    "fundamental_cycles",
    "girth",
    "girth_lower_bound",
    "family_to_json",
    "family_from_json",
    "make_certificate",
]


class CycleSpaceError(ValueError):
    pass


def edge_vector(ids: Iterable[int]) -> int:
    x = 0
    for e in ids:
        x ^= 1 << e
    return x


def edge_ids(x: int) -> list[int]:
    out = []
    while x:
        low = x & -x
        out.append(low.bit_length() - 1)
        x ^= low
    return out


def odd_vertices(g: Graph, x: int) -> list[int]:
    deg = [0] * g.n
    for e in edge_ids(x):
        u, v = g.edges[e]
        deg[u] ^= 1
        deg[v] ^= 1
    return [v for v in range(g.n) if deg[v]]


def _check_host(g: Graph, x: int):
    if x < 0 or x.bit_length() > g.m:
        raise CycleSpaceError(f"edge vector uses ids outside 0..{g.m - 1}")


def is_f2_cycle(g: Graph, x: int) -> bool:
    _check_host(g, x)
    return not odd_vertices(g, x)


@dataclass
class CycleFamily:
    graph: Graph
    members: list[int] = field(default_factory=list)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def extend(self, xs: Iterable[int]):
        self.members.extend(xs)


def cycle_space_dimension(g: Graph) -> int:
    return g.m - g.n + len(connected_components(g))


def _reduce(pivots: dict[int, int], x: int) -> int:
    # pivot on lowest set bit
    while x:
        low = (x & -x).bit_length() - 1
        p = pivots.get(low)
        if p is None:
            return x
        x ^= p
    return 0


def rank(fam: CycleFamily | Sequence[int]) -> int:
    members = fam.members if isinstance(fam, CycleFamily) else fam
    pivots: dict[int, int] = {}
    for x in members:
        r = _reduce(pivots, x)
        if r:
            pivots[(r & -r).bit_length() - 1] = r
    return len(pivots)


def _check_cycles(g: Graph, members: Sequence[int]):
    for i, x in enumerate(members):
        _check_host(g, x)
        odd = odd_vertices(g, x)
        if odd:
            raise CycleSpaceError(f"member {i} is not an F2-cycle: vertex {odd[0]} has odd degree")


def generates_cycle_space(g: Graph, fam: CycleFamily | Sequence[int]) -> bool:
    members = fam.members if isinstance(fam, CycleFamily) else list(fam)
    _check_cycles(g, members)
    return rank(members) == cycle_space_dimension(g)


def edge_loads(m: int, members: Iterable[int]) -> list[int]:
    load = [0] * m
    for x in members:
        for e in edge_ids(x):
            load[e] += 1
    return load


def congestion(fam: CycleFamily | Sequence[int], m: int | None = None) -> int:
    if isinstance(fam, CycleFamily):
        members, m = fam.members, fam.graph.m
    else:
        members = list(fam)
        if m is None:
            m = max((x.bit_length() for x in members), default=0)
    return max(edge_loads(m, members), default=0)


def prune_to_basis(fam: CycleFamily) -> CycleFamily:
    """Keep-first greedy subsequence that is independent and spans the cycle space."""
    g = fam.graph
    pivots: dict[int, int] = {}
    kept = []
    for x in fam.members:
        r = _reduce(pivots, x)
        if r:
            pivots[(r & -r).bit_length() - 1] = r
            kept.append(x)
    dim = cycle_space_dimension(g)
    if len(kept) != dim:
        raise CycleSpaceError(f"family does not generate: rank {len(kept)} < {dim}")
    return CycleFamily(g, kept)


def fundamental_cycles(g: Graph) -> list[int]:
    """Fundamental cycles of a BFS spanning forest (a basis of the cycle space)."""
    forest = spanning_forest(g)
    fg = Graph(g.n, [g.edges[e] for e in forest])
    out = []
    for e, (u, v) in enumerate(g.edges):
        if e in forest:
            continue
        p = shortest_path(fg, u, v)
        x = 1 << e
        for a, b in zip(p.vertices, p.vertices[1:]):
            x |= 1 << g.edge_id(a, b)
        out.append(x)
    return out


def girth(g: Graph) -> int | None:
    """Length of a shortest cycle (BFS from each vertex), None on forests."""
    best = None
    for s in range(g.n):
        dist = {s: 0}
        par = {s: -1}
        q = deque([s])
        while q:
            u = q.popleft()
            if best is not None and 2 * dist[u] + 1 >= best:
                break
            for w in g.neighbours(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    par[w] = u
                    q.append(w)
                elif par[u] != w:
                    c = dist[u] + dist[w] + 1
                    if best is None or c < best:
                        best = c
    return best


def girth_lower_bound(g: Graph) -> Fraction:
    gam = girth(g)
    if gam is None:
        raise CycleSpaceError("no cycle: girth bound undefined on a forest")
    # 1 - 2/d with d = 2m/n
    return (1 - Fraction(g.n, g.m)) * gam


@dataclass
class BasisCertificate:
    family: CycleFamily
    claimed_congestion: int
    measured_congestion: int
    rank: int
    cycle_space_dim: int
    ideal_bound: int | None = None
    note: str = ""
    details: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.rank == self.cycle_space_dim and self.measured_congestion <= self.claimed_congestion

    def failure(self) -> str | None:
        if self.rank < self.cycle_space_dim:
            return f"rank {self.rank} < {self.cycle_space_dim}"
        if self.measured_congestion > self.claimed_congestion:
            return f"congestion {self.measured_congestion} > claimed {self.claimed_congestion}"
        return None

    def to_dict(self) -> dict:
        d = family_to_dict(self.family)
        d.update(
            claimed_congestion=self.claimed_congestion,
            measured_congestion=self.measured_congestion,
            rank=self.rank,
            cycle_space_dim=self.cycle_space_dim,
        )
        if self.ideal_bound is not None:
            d["ideal_bound"] = self.ideal_bound
        return d


def make_certificate(
    g: Graph,
    members: Sequence[int],
    claimed: int,
    ideal: int | None = None,
    note: str = "",
    details: dict | None = None,
) -> BasisCertificate:
    members = list(members)
    _check_cycles(g, members)
    return BasisCertificate(
        CycleFamily(g, members),
        claimed,
        congestion(members, g.m),
        rank(members),
        cycle_space_dimension(g),
        ideal,
        note,
        details or {},
    )


def family_to_dict(fam: CycleFamily) -> dict:
    return {"graph_hash": fam.graph.fingerprint(), "cycles": [edge_ids(x) for x in fam.members]}


def family_to_json(fam: CycleFamily) -> str:
    return json.dumps(family_to_dict(fam))


def family_from_json(g: Graph, text: str | dict) -> CycleFamily:
    d = json.loads(text) if isinstance(text, str) else text
    if d.get("graph_hash") not in (None, g.fingerprint()):
        raise CycleSpaceError("graph_hash does not match the host graph")
    return CycleFamily(g, [edge_vector(c) for c in d["cycles"]])
