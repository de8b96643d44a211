"""Exact basis number by branch-and-bound over simple cycles (small graphs only)."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

from .cyclespace import (
    BasisCertificate,
    CycleFamily,
    congestion,
    cycle_space_dimension,
    edge_ids,
    fundamental_cycles,
    girth_lower_bound,
    make_certificate,
    odd_vertices,
    prune_to_basis,
    rank,
)
from .graph import Graph

__all__ = [
    "CycleLimitExceeded",
    "OracleResult",
    "enumerate_simple_cycles",
    "exact_basis_number",
    "verify_certificate",
    "DEFAULT_BUDGET",
]

DEFAULT_BUDGET = 10**7


class CycleLimitExceeded(RuntimeError):
    def __init__(self, partial: int, limit: int):
        super().__init__(f"more than {limit} simple cycles (stopped after {partial})")
        self.partial = partial
        self.limit = limit


@dataclass
class OracleResult:
    bn: int
    witness: BasisCertificate
    explored_nodes: int
    timed_out: bool

    def to_dict(self) -> dict:
        return {
            "bn": self.bn,
            "explored_nodes": self.explored_nodes,
            "timed_out": self.timed_out,
            "witness": self.witness.to_dict(),
        }


def enumerate_simple_cycles(g: Graph, limit: int = 200_000) -> CycleFamily:
    """All simple cycles as edge bitsets, ordered by length then edge ids."""
    found: list[int] = []
    nb = [g.neighbours(v) for v in range(g.n)]
    for s in range(g.n):
        # cycles whose minimum vertex is s; orient so that second vertex < last
        path = [s]
        on_path = {s}
        mask_stack = [0]

        def dfs(u):
            for w in nb[u]:
                if w < s:
                    continue
                if w == s:
                    if len(path) >= 3 and path[1] < path[-1]:
                        found.append(mask_stack[-1] | (1 << g.edge_id(u, s)))
                        if len(found) > limit:
                            raise CycleLimitExceeded(len(found), limit)
                    continue
                if w in on_path:
                    continue
                on_path.add(w)
                path.append(w)
                mask_stack.append(mask_stack[-1] | (1 << g.edge_id(u, w)))
                dfs(w)
                mask_stack.pop()
                path.pop()
                on_path.discard(w)

        dfs(s)
    found.sort(key=lambda x: (x.bit_count(), edge_ids(x)))
    return CycleFamily(g, found)


def _insert(pivots: dict[int, int], x: int) -> bool:
    while x:
        low = (x & -x).bit_length() - 1
        p = pivots.get(low)
        if p is None:
            pivots[low] = x
            return True
        x ^= p
    return False


class _Budget(Exception):
    pass


class _Search:
    def __init__(self, g: Graph, cycles: list[int], dim: int, k: int, budget: int):
        self.g = g
        self.m = g.m
        self.cycles = cycles
        self.lengths = [c.bit_count() for c in cycles]
        self.dim = dim
        self.k = k
        self.budget = budget
        self.nodes = 0
        self.load = [0] * g.m
        self.sat = 0
        self.chosen: list[int] = []
        self.used = 0
        self.basis = fundamental_cycles(g)

    def _annihilators(self, rows: list[int]) -> list[int]:
        # reduced echelon form of chosen rows, pivot on lowest set bit
        piv: dict[int, int] = {}
        for x in rows:
            for p, r in piv.items():
                if (x >> p) & 1:
                    x ^= r
            if not x:
                continue
            p = (x & -x).bit_length() - 1
            for q in list(piv):
                if (piv[q] >> p) & 1:
                    piv[q] ^= x
            piv[p] = x
        out = []
        for f in range(self.m):
            if f in piv:
                continue
            y = 1 << f
            for p, r in piv.items():
                if (r >> f) & 1:
                    y |= 1 << p
            out.append(y)
        return out

    def run(self) -> list[int] | None:
        return self._rec(list(range(len(self.cycles))), {})

    def _rec(self, avail: list[int], pivots: dict[int, int]) -> list[int] | None:
        # avail: candidate indices, already filtered for capacity and exclusion;
        # pivots: echelon basis of the chosen cycles
        self.nodes += 1
        if self.nodes > self.budget:
            raise _Budget
        need = self.dim - len(self.chosen)
        if need == 0:
            return list(self.chosen)
        if len(avail) < need:
            return None
        # slot counting: the cheapest completion of the chosen cycles to a
        # basis (matroid greedy over length-sorted candidates) must fit in the
        # remaining k*m edge slots; failing to complete means rank is short
        cycles = self.cycles
        piv = dict(pivots)
        extra = 0
        for i in avail:
            if _insert(piv, cycles[i]):
                extra += self.lengths[i]
                if len(piv) == self.dim:
                    break
        if len(piv) < self.dim or self.used + extra > self.k * self.m:
            return None
        best = None
        for y in self._annihilators(list(pivots.values())):
            if not any((y & b).bit_count() & 1 for b in self.basis):
                continue
            odd = [i for i in avail if (y & cycles[i]).bit_count() & 1]
            if not odd:
                return None
            if best is None or len(odd) < len(best):
                best = odd
                if len(best) == 1:
                    break
        assert best is not None
        dropped = set()
        for i in best:
            c = cycles[i]
            dropped.add(i)
            self._push(i, c)
            sat = self.sat
            child = [j for j in avail if j not in dropped and not (cycles[j] & sat)]
            child_piv = dict(pivots)
            _insert(child_piv, c)
            res = self._rec(child, child_piv)
            self._pop(i, c)
            if res is not None:
                return res
        return None

    def _push(self, i: int, c: int):
        self.chosen.append(i)
        self.used += self.lengths[i]
        for e in edge_ids(c):
            self.load[e] += 1
            if self.load[e] >= self.k:
                self.sat |= 1 << e

    def _pop(self, i: int, c: int):
        self.chosen.pop()
        self.used -= self.lengths[i]
        for e in edge_ids(c):
            self.load[e] -= 1
            if self.load[e] < self.k:
                self.sat &= ~(1 << e)


def exact_basis_number(g: Graph, budget: int | None = None, cycle_limit: int = 200_000) -> OracleResult:
    """Minimum congestion of a cycle basis of ``g``.

    Iterative deepening over the congestion bound, starting from the girth
    bound; each level is an exhaustive feasibility search.
    """
    if budget is None:
        budget = int(os.environ.get("BN_BUDGET", DEFAULT_BUDGET))
    dim = cycle_space_dimension(g)
    if dim == 0:
        return OracleResult(0, make_certificate(g, [], 0), 0, False)
    cycles = enumerate_simple_cycles(g, cycle_limit).members
    # shortest-first greedy basis gives a starting upper bound
    greedy = prune_to_basis(CycleFamily(g, cycles)).members
    ub = congestion(greedy, g.m)
    lo = max(1, math.ceil(girth_lower_bound(g)))
    nodes = 0
    for k in range(lo, ub):
        s = _Search(g, cycles, dim, k, budget - nodes)
        try:
            sol = s.run()
        except _Budget:
            nodes = budget
            return OracleResult(ub, make_certificate(g, greedy, ub), nodes, True)
        nodes += s.nodes
        if sol is not None:
            members = [cycles[i] for i in sorted(sol)]
            return OracleResult(k, make_certificate(g, members, k), nodes, False)
    return OracleResult(ub, make_certificate(g, greedy, ub), nodes, False)


def verify_certificate(g: Graph, cert: BasisCertificate) -> tuple[bool, str]:
    """Recheck a certificate from scratch; returns (ok, reason)."""
    members = cert.family.members
    for i, x in enumerate(members):
        if x < 0 or x.bit_length() > g.m:
            return False, f"member {i} uses an edge id outside the graph"
        odd = odd_vertices(g, x)
        if odd:
            return False, f"member {i} is not an F2-cycle (vertex {odd[0]} has odd degree)"
    r = rank(members)
    dim = cycle_space_dimension(g)
    if r < dim:
        return False, f"rank {r} < {dim}"
    meas = congestion(members, g.m)
    if meas > cert.claimed_congestion:
        return False, f"congestion {meas} > claimed {cert.claimed_congestion}"
    return True, "ok"
