"""Bi-interface graphs, connectivity abstractions and factorisation trees."""
from __future__ import annotations

import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Hashable, Iterable, Sequence

from .decomposition import PathDecomposition
from .graph import Graph

__all__ = [
    "BiInterfaceGraph",
    "Abstraction",
    "FactorisationTree",
    "glue",
    "glue_shared",
    "glue_all",
    "embed_word",
    "abstraction",
    "product",
    "ProductTable",
    "persistent_vertices",
    "hat",
    "word_from_path_decomposition",
    "reachable_subsemigroup",
    "factorise",
    "check_tree",
]


def _norm(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class BiInterfaceGraph:
    """Graph on integer vertex ids with partial injective maps lam, rho: [k] -> V.

    ``lam[i]`` / ``rho[i]`` is the vertex of slot i or None.
    """

    vertices: frozenset
    edges: frozenset  # of sorted pairs
    lam: tuple
    rho: tuple

    def __post_init__(self):
        if len(self.lam) != len(self.rho):
            raise ValueError("left and right interfaces have different arity")
        for name, mp in (("lam", self.lam), ("rho", self.rho)):
            used = [x for x in mp if x is not None]
            if len(set(used)) != len(used):
                raise ValueError(f"{name} is not injective")
            if not set(used) <= self.vertices:
                raise ValueError(f"{name} maps outside the vertex set")
        for i, x in enumerate(self.lam):
            for j, y in enumerate(self.rho):
                if x is not None and x == y and i != j:
                    raise ValueError(f"lam({i}) = rho({j}) with different slots")
        for u, v in self.edges:
            if u == v or u not in self.vertices or v not in self.vertices:
                raise ValueError(f"bad edge {u}-{v}")

    @staticmethod
    def build(vertices: Iterable[int], edges: Iterable[tuple[int, int]], lam: Sequence, rho: Sequence) -> "BiInterfaceGraph":
        return BiInterfaceGraph(
            frozenset(vertices), frozenset(_norm(u, v) for u, v in edges), tuple(lam), tuple(rho)
        )

    @property
    def k(self) -> int:
        return len(self.lam)

    def interface(self) -> frozenset:
        return frozenset(x for x in self.lam + self.rho if x is not None)

    def adjacency(self) -> dict[int, list[int]]:
        adj: dict[int, list[int]] = {v: [] for v in self.vertices}
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        for lst in adj.values():
            lst.sort()
        return adj

    def induced(self, vs: Iterable[int]) -> "BiInterfaceGraph":
        s = frozenset(vs) & self.vertices
        return BiInterfaceGraph(
            s,
            frozenset(e for e in self.edges if e[0] in s and e[1] in s),
            tuple(x if x in s else None for x in self.lam),
            tuple(x if x in s else None for x in self.rho),
        )

    def minus(self, vs: Iterable[int]) -> "BiInterfaceGraph":
        return self.induced(self.vertices - frozenset(vs))

    def to_graph(self) -> tuple[Graph, list[int]]:
        """Underlying graph relabelled to 0..N-1, plus local -> vertex id map."""
        vs = sorted(self.vertices)
        pos = {v: i for i, v in enumerate(vs)}
        return Graph(len(vs), [(pos[u], pos[v]) for u, v in self.edges]), vs

    def relabelled(self, mapping: dict) -> "BiInterfaceGraph":
        return BiInterfaceGraph(
            frozenset(mapping[v] for v in self.vertices),
            frozenset(_norm(mapping[u], mapping[v]) for u, v in self.edges),
            tuple(None if x is None else mapping[x] for x in self.lam),
            tuple(None if x is None else mapping[x] for x in self.rho),
        )


def glue(g1: BiInterfaceGraph, g2: BiInterfaceGraph) -> BiInterfaceGraph:
    """Identify rho1(i) with lam2(i); result relabelled to 0..N-1.

    Vertices of g1 come first (sorted), then the unidentified vertices of g2.
    """
    if g1.k != g2.k:
        raise ValueError(f"arity mismatch: {g1.k} vs {g2.k}")
    m1 = {v: i for i, v in enumerate(sorted(g1.vertices))}
    ident = {}
    for i in range(g1.k):
        if g1.rho[i] is not None and g2.lam[i] is not None:
            ident[g2.lam[i]] = m1[g1.rho[i]]
    m2 = {}
    nxt = len(m1)
    for v in sorted(g2.vertices):
        if v in ident:
            m2[v] = ident[v]
        else:
            m2[v] = nxt
            nxt += 1
    edges = {_norm(m1[u], m1[v]) for u, v in g1.edges} | {_norm(m2[u], m2[v]) for u, v in g2.edges}
    return BiInterfaceGraph(
        frozenset(range(nxt)),
        frozenset(edges),
        tuple(None if x is None else m1[x] for x in g1.lam),
        tuple(None if x is None else m2[x] for x in g2.rho),
    )


def glue_shared(g1: BiInterfaceGraph, g2: BiInterfaceGraph) -> BiInterfaceGraph:
    """Glueing of operands drawn from one vertex namespace.

    Requires rho1(i) == lam2(i) whenever both are defined, and that the operands
    share no other vertex; the result keeps the original vertex ids.
    """
    if g1.k != g2.k:
        raise ValueError(f"arity mismatch: {g1.k} vs {g2.k}")
    ident = set()
    for i in range(g1.k):
        a, b = g1.rho[i], g2.lam[i]
        if a is not None and b is not None:
            if a != b:
                raise ValueError(f"slot {i}: rho1 = {a} but lam2 = {b}")
            ident.add(a)
    if (g1.vertices & g2.vertices) != ident:
        extra = sorted((g1.vertices & g2.vertices) - ident)
        raise ValueError(f"operands share non-interface vertex {extra[0] if extra else '?'}")
    return BiInterfaceGraph(g1.vertices | g2.vertices, g1.edges | g2.edges, g1.lam, g2.rho)


def glue_all(word: Sequence[BiInterfaceGraph], shared: bool = False) -> BiInterfaceGraph:
    op = glue_shared if shared else glue
    out = word[0]
    for x in word[1:]:
        out = op(out, x)
    return out


def embed_word(word: Sequence[BiInterfaceGraph]) -> list[BiInterfaceGraph]:
    """Relabel letters into one namespace so consecutive letters glue by sharing ids.

    ``glue_all(embed_word(w), shared=True)`` is ``glue_all(w)`` up to relabelling;
    letter i occupies vertex set ``embed_word(w)[i].vertices``.
    """
    out: list[BiInterfaceGraph] = []
    nxt = 0
    prev_rho: tuple = ()
    for j, letter in enumerate(word):
        if j and letter.k != word[0].k:
            raise ValueError(f"arity mismatch at letter {j}")
        mp = {}
        for i, x in enumerate(letter.lam):
            if x is not None and j and prev_rho[i] is not None:
                mp[x] = prev_rho[i]
        for v in sorted(letter.vertices):
            if v not in mp:
                mp[v] = nxt
                nxt += 1
        emb = letter.relabelled(mp)
        out.append(emb)
        prev_rho = emb.rho
    return out


def persistent_vertices(g: BiInterfaceGraph) -> frozenset:
    return frozenset(g.lam[i] for i in range(g.k) if g.lam[i] is not None and g.lam[i] == g.rho[i])


def hat(g: BiInterfaceGraph) -> BiInterfaceGraph:
    return g.minus(persistent_vertices(g))


# abstractions ------------------------------------------------------------------

@dataclass(frozen=True)
class Abstraction:
    """Connectivity abstraction with slot-labelled vertices.

    An interface vertex is labelled ("P", i) if persistent in slot i, else
    ("L", i) or ("R", i).  Edges join labels whose vertices are linked by a
    path with no internal interface vertex.
    """

    k: int
    labels: frozenset
    edges: frozenset  # of sorted label pairs

    def as_bigraph(self) -> BiInterfaceGraph:
        order = sorted(self.labels)
        pos = {lab: i for i, lab in enumerate(order)}
        lam = [None] * self.k
        rho = [None] * self.k
        for (kind, i), p in pos.items():
            if kind in ("L", "P"):
                lam[i] = p
            if kind in ("R", "P"):
                rho[i] = p
        return BiInterfaceGraph(
            frozenset(pos.values()),
            frozenset(_norm(pos[a], pos[b]) for a, b in self.edges),
            tuple(lam),
            tuple(rho),
        )

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "labels": [f"{kind}{i}" for kind, i in sorted(self.labels)],
            "edges": [[f"{a[0]}{a[1]}", f"{b[0]}{b[1]}"] for a, b in sorted(self.edges)],
        }


def _labels(g: BiInterfaceGraph) -> dict[int, tuple[str, int]]:
    lab = {}
    for i in range(g.k):
        a, b = g.lam[i], g.rho[i]
        if a is not None and a == b:
            lab[a] = ("P", i)
        else:
            if a is not None:
                lab[a] = ("L", i)
            if b is not None:
                lab[b] = ("R", i)
    return lab


def abstraction(g: BiInterfaceGraph) -> Abstraction:
    lab = _labels(g)
    adj = g.adjacency()
    edges = set()
    for x in sorted(lab):
        # BFS from x through non-interface vertices
        seen = {x}
        q = deque([x])
        while q:
            u = q.popleft()
            for w in adj[u]:
                if w in seen:
                    continue
                seen.add(w)
                if w in lab:
                    edges.add(_norm(lab[x], lab[w]))
                else:
                    q.append(w)
    return Abstraction(g.k, frozenset(lab.values()), frozenset(edges))


class ProductTable:
    """Memoised product on abstractions (only reachable elements are stored)."""

    def __init__(self):
        self._table: dict[tuple[Abstraction, Abstraction], Abstraction] = {}
        self._lock = threading.Lock()

    def __call__(self, a: Abstraction, b: Abstraction) -> Abstraction:
        key = (a, b)
        hit = self._table.get(key)
        if hit is not None:
            return hit
        if a.k != b.k:
            raise ValueError(f"arity mismatch: {a.k} vs {b.k}")
        val = abstraction(glue(a.as_bigraph(), b.as_bigraph()))
        with self._lock:
            self._table.setdefault(key, val)
        return val

    def __len__(self):
        return len(self._table)


_default_table = ProductTable()


def product(a: Abstraction, b: Abstraction) -> Abstraction:
    return _default_table(a, b)


def word_from_path_decomposition(g: Graph, pd: PathDecomposition, k: int) -> list[BiInterfaceGraph]:
    """Letters G[X_i] with slot maps that agree on consecutive adhesions."""
    bags = pd.bag_list
    adh = [bags[i] & bags[i + 1] for i in range(len(bags) - 1)]
    for i, a in enumerate(adh):
        if len(a) > k:
            raise ValueError(f"adhesion between bags {i} and {i + 1} has size {len(a)} > {k}")
    slots: list[dict[int, int]] = []
    prev: dict[int, int] = {}
    for a in adh:
        f = {x: s for x, s in prev.items() if x in a}
        free = [s for s in range(k) if s not in f.values()]
        for x in sorted(a - set(f)):
            f[x] = free.pop(0)
        slots.append(f)
        prev = f
    word = []
    for i, bag in enumerate(bags):
        lam = [None] * k
        rho = [None] * k
        if i > 0:
            for x, s in slots[i - 1].items():
                lam[s] = x
        if i < len(bags) - 1:
            for x, s in slots[i].items():
                rho[s] = x
        es = [g.edges[e] for e in g.edge_subgraph_ids(bag)]
        word.append(BiInterfaceGraph.build(bag, es, lam, rho))
    return word


def reachable_subsemigroup(values: Iterable[Abstraction], mul: Callable = product) -> set[Abstraction]:
    gens = list(dict.fromkeys(values))
    S = set(gens)
    frontier = list(gens)
    while frontier:
        new = []
        for a in frontier:
            for b in gens:
                for c in (mul(a, b), mul(b, a)):
                    if c not in S:
                        S.add(c)
                        new.append(c)
        frontier = new
    return S


# factorisation trees -------------------------------------------------------------

@dataclass
class FactorisationTree:
    kind: str  # "leaf" | "binary" | "idempotent"
    start: int
    end: int  # letters start..end-1
    value: Hashable
    children: list["FactorisationTree"] = field(default_factory=list)

    @property
    def height(self) -> int:
        return 0 if self.kind == "leaf" else 1 + max(c.height for c in self.children)

    def leaves(self) -> list[int]:
        if self.kind == "leaf":
            return [self.start]
        out = []
        for c in self.children:
            out.extend(c.leaves())
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "span": [self.start, self.end]}
        if self.kind != "leaf":
            d["children"] = [c.to_dict() for c in self.children]
        return d


def _leaf(i, v):
    return FactorisationTree("leaf", i, i + 1, v)


def _binary(a: FactorisationTree, b: FactorisationTree, mul) -> FactorisationTree:
    return FactorisationTree("binary", a.start, b.end, mul(a.value, b.value), [a, b])


def _bits(x: int):
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def factorise(values: Sequence[Hashable], mul: Callable = product) -> FactorisationTree:
    """Minimum-height factorisation tree of a nonempty word given by letter values.

    Level by level, ``reach[h][i]`` is the bitset of ends j such that the infix
    i..j-1 has a tree of height at most h: either already at level h-1, a
    binary split of two level-(h-1) infixes, or a chain of at least two
    level-(h-1) infixes sharing one idempotent value.  The tree is then read
    back top-down.
    """
    if not values:
        raise ValueError("cannot factorise the empty word")
    vals = list(values)
    n = len(vals)
    # val[i][j - i - 1] = value of the infix i..j-1
    val = []
    for i in range(n):
        row = [vals[i]]
        for j in range(i + 1, n):
            row.append(mul(row[-1], vals[j]))
        val.append(row)
    idem = {}
    for row in val:
        for x in row:
            if x not in idem:
                idem[x] = mul(x, x) == x
    idems = [e for e, ok in idem.items() if ok]
    # same[e][i]: ends j whose infix i..j-1 has value e
    same = {e: [0] * (n + 1) for e in idems}
    for i, row in enumerate(val):
        for d, x in enumerate(row):
            if idem[x]:
                same[x][i] |= 1 << (i + d + 1)

    reach = [[1 << (i + 1) for i in range(n)] + [0]]
    while not (reach[-1][0] >> n) & 1:
        prev = reach[-1]
        cur = list(prev)
        for i in range(n):
            acc = cur[i]
            for m in _bits(prev[i]):
                acc |= prev[m]
            cur[i] = acc
        for e in idems:
            step = [prev[i] & same[e][i] for i in range(n)] + [0]
            closure = [0] * (n + 1)
            for q in range(n - 1, -1, -1):
                c = step[q]
                for r in _bits(step[q]):
                    c |= closure[r]
                closure[q] = c
            for i in range(n):
                multi = 0
                for q in _bits(step[i]):
                    multi |= closure[q]
                cur[i] |= multi
        reach.append(cur)

    def build(i: int, j: int, h: int) -> FactorisationTree:
        while h > 0 and (reach[h - 1][i] >> j) & 1:
            h -= 1
        if h == 0:
            return _leaf(i, vals[i])
        prev = reach[h - 1]
        for m in _bits(prev[i]):
            if (prev[m] >> j) & 1:
                return _binary(build(i, m, h - 1), build(m, j, h - 1), mul)
        for e in idems:
            # BFS over block boundaries, at least two blocks of value e
            par = {i: None}
            frontier = [i]
            while frontier:
                nxt = []
                for p in frontier:
                    for q in _bits(prev[p] & same[e][p]):
                        if q == j and p != i:
                            chain = [j, p]
                            while par[chain[-1]] is not None:
                                chain.append(par[chain[-1]])
                            chain.reverse()
                            kids = [build(a, b, h - 1) for a, b in zip(chain, chain[1:])]
                            return FactorisationTree("idempotent", i, j, e, kids)
                        if q not in par and q < j:
                            par[q] = p
                            nxt.append(q)
                frontier = nxt
        raise AssertionError(f"no factorisation found for {i}..{j} at height {h}")

    return build(0, n, len(reach) - 1)


def check_tree(tree: FactorisationTree, values: Sequence[Hashable], mul: Callable = product) -> tuple[bool, str]:
    """Validate leaf order, node values, arities and idempotent nodes."""
    if tree.leaves() != list(range(len(values))):
        return False, "leaf sequence differs from the word"

    def rec(t: FactorisationTree) -> str | None:
        if t.kind == "leaf":
            if t.end != t.start + 1 or t.value != values[t.start]:
                return f"leaf {t.start} has the wrong value"
            return None
        for c in t.children:
            err = rec(c)
            if err:
                return err
        if t.children[0].start != t.start or t.children[-1].end != t.end:
            return f"node {t.start}..{t.end} does not span its children"
        for a, b in zip(t.children, t.children[1:]):
            if a.end != b.start:
                return f"children of node {t.start}..{t.end} are not contiguous"
        acc = t.children[0].value
        for c in t.children[1:]:
            acc = mul(acc, c.value)
        if acc != t.value:
            return f"node {t.start}..{t.end} value is not the product of its children"
        if t.kind == "binary":
            if len(t.children) != 2:
                return f"binary node {t.start}..{t.end} has {len(t.children)} children"
        elif t.kind == "idempotent":
            if len(t.children) < 2:
                return f"idempotent node {t.start}..{t.end} has fewer than two children"
            e = t.children[0].value
            if any(c.value != e for c in t.children) or mul(e, e) != e:
                return f"idempotent node {t.start}..{t.end} children do not share an idempotent value"
        else:
            return f"unknown node kind {t.kind}"
        return None

    err = rec(tree)
    return (False, err) if err else (True, "ok")
