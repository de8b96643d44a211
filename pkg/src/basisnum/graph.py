"""Simple undirected graphs with stable edge ids, traversals and file formats."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

__all__ = [
    "Graph",
    "GraphFormatError",
    "VertexPath",
    "Separation",
    "parse_graph6",
    "encode_graph6",
    "parse_edge_list",
    "encode_edge_list",
    "read_graph",
    "spanning_forest",
    "shortest_path",
    "connected_components",
    "connecting_forest",
    "is_forest",
]


class GraphFormatError(ValueError):
    pass


class Graph:
    """Simple graph on vertices 0..n-1; edge ids follow sorted (min, max) order."""

    __slots__ = ("n", "edges", "adjacency", "_index", "_nbrs")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise ValueError("negative vertex count")
        norm = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            e = (u, v) if u < v else (v, u)
            if e in norm:
                raise ValueError(f"duplicate edge {e}")
            norm.add(e)
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(norm))
        self._index = {e: i for i, e in enumerate(self.edges)}
        adj: list[list[int]] = [[] for _ in range(n)]
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for i, (u, v) in enumerate(self.edges):
            adj[u].append(i)
            adj[v].append(i)
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.adjacency = tuple(tuple(a) for a in adj)
        self._nbrs = tuple(tuple(sorted(a)) for a in nbrs)

    @property
    def m(self) -> int:
        return len(self.edges)

    def neighbours(self, v: int) -> tuple[int, ...]:
        return self._nbrs[v]

    def degree(self, v: int) -> int:
        return len(self._nbrs[v])

    def edge_id(self, u: int, v: int) -> int:
        return self._index[(u, v) if u < v else (v, u)]

    def has_edge(self, u: int, v: int) -> bool:
        return ((u, v) if u < v else (v, u)) in self._index

    def other(self, eid: int, v: int) -> int:
        a, b = self.edges[eid]
        return b if a == v else a

    def induced(self, vertices: Iterable[int]) -> tuple["Graph", list[int]]:
        """Induced subgraph relabelled to 0..k-1, plus the map new -> old vertex."""
        vs = sorted(set(vertices))
        pos = {v: i for i, v in enumerate(vs)}
        es = [(pos[u], pos[v]) for u, v in self.edges if u in pos and v in pos]
        return Graph(len(vs), es), vs

    def edge_subgraph_ids(self, vertices: Iterable[int]) -> list[int]:
        """Edge ids of G[vertices]."""
        s = set(vertices)
        return [i for i, (u, v) in enumerate(self.edges) if u in s and v in s]

    def with_edges(self, extra: Iterable[tuple[int, int]]) -> "Graph":
        es = set(self.edges)
        for u, v in extra:
            es.add((min(u, v), max(u, v)))
        return Graph(self.n, es)

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256(f"{self.n};".encode())
        h.update(";".join(f"{u},{v}" for u, v in self.edges).encode())
        return h.hexdigest()[:16]

    def __eq__(self, other):
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self):
        return hash((self.n, self.edges))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class VertexPath:
    vertices: tuple[int, ...]
    edge_ids: tuple[int, ...]

    @staticmethod
    def from_vertices(g: Graph, vertices: Sequence[int]) -> "VertexPath":
        vs = tuple(vertices)
        if len(set(vs)) != len(vs):
            raise ValueError("path repeats a vertex")
        eids = tuple(g.edge_id(a, b) for a, b in zip(vs, vs[1:]))
        return VertexPath(vs, eids)

    @property
    def ends(self) -> tuple[int, int]:
        return self.vertices[0], self.vertices[-1]

    def edge_mask(self) -> int:
        x = 0
        for e in self.edge_ids:
            x |= 1 << e
        return x


@dataclass(frozen=True)
class Separation:
    X: frozenset
    Y: frozenset

    @property
    def order(self) -> int:
        return len(self.X & self.Y)

    def is_valid(self, g: Graph) -> bool:
        if self.X | self.Y != frozenset(range(g.n)):
            return False
        a, b = self.X - self.Y, self.Y - self.X
        return not any((u in a and v in b) or (u in b and v in a) for u, v in g.edges)


# graph6 ----------------------------------------------------------------------

def _decode_n(data: bytes) -> tuple[int, int]:
    if not data:
        raise GraphFormatError("empty graph6 string at byte 0")
    for i, c in enumerate(data):
        if c < 63 or c > 126:
            raise GraphFormatError(f"invalid graph6 byte {c!r} at byte {i}")
    if data[0] != 126:
        return data[0] - 63, 1
    if len(data) >= 2 and data[1] == 126:
        if len(data) < 8:
            raise GraphFormatError("truncated long header at byte 2")
        n = 0
        for c in data[2:8]:
            n = (n << 6) | (c - 63)
        return n, 8
    if len(data) < 4:
        raise GraphFormatError("truncated header at byte 1")
    n = 0
    for c in data[1:4]:
        n = (n << 6) | (c - 63)
    return n, 4


def parse_graph6(text: str | bytes) -> Graph:
    """Decode one graph6 line (the optional >>graph6<< header is accepted)."""
    data = text.encode("ascii") if isinstance(text, str) else bytes(text)
    data = data.strip()
    offset = 0
    if data.startswith(b">>graph6<<"):
        data = data[10:]
        offset = 10
    try:
        n, pos = _decode_n(data)
    except GraphFormatError as exc:
        raise GraphFormatError(f"{exc} (offset base {offset})") from None
    nbits = n * (n - 1) // 2
    need = (nbits + 5) // 6
    body = data[pos:]
    if len(body) != need:
        raise GraphFormatError(
            f"expected {need} data bytes, found {len(body)} at byte {offset + pos}"
        )
    bits = []
    for c in body:
        x = c - 63
        bits.extend((x >> s) & 1 for s in range(5, -1, -1))
    if any(bits[nbits:]):
        raise GraphFormatError(f"nonzero padding at byte {offset + pos + need - 1}")
    edges = []
    k = 0
    for j in range(1, n):
        for i in range(j):
            if bits[k]:
                edges.append((i, j))
            k += 1
    return Graph(n, edges)


def encode_graph6(g: Graph) -> str:
    n = g.n
    if n < 63:
        out = [n + 63]
    elif n < 258048:
        out = [126] + [((n >> s) & 63) + 63 for s in (12, 6, 0)]
    else:
        out = [126, 126] + [((n >> s) & 63) + 63 for s in (30, 24, 18, 12, 6, 0)]
    bits = [1 if g.has_edge(i, j) else 0 for j in range(1, n) for i in range(j)]
    bits.extend([0] * (-len(bits) % 6))
    for i in range(0, len(bits), 6):
        x = 0
        for b in bits[i : i + 6]:
            x = (x << 1) | b
        out.append(x + 63)
    return bytes(out).decode("ascii")


def parse_edge_list(text: str) -> Graph:
    """Parse the "n m" header followed by m lines "u v"."""
    tokens = text.split()
    if len(tokens) < 2:
        raise GraphFormatError("edge list needs an 'n m' header")
    try:
        nums = [int(t) for t in tokens]
    except ValueError as exc:
        raise GraphFormatError(f"non-integer token in edge list: {exc}") from None
    n, m = nums[0], nums[1]
    rest = nums[2:]
    if len(rest) != 2 * m:
        raise GraphFormatError(f"header says {m} edges, found {len(rest) / 2:g}")
    try:
        return Graph(n, zip(rest[0::2], rest[1::2]))
    except ValueError as exc:
        raise GraphFormatError(str(exc)) from None


def encode_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"] + [f"{u} {v}" for u, v in g.edges]
    return "\n".join(lines) + "\n"


def read_graph(path: str, fmt: str | None = None) -> Graph:
    """Read a graph file; format chosen by ``fmt`` or by extension (.g6 / other)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if fmt is None:
        fmt = "graph6" if path.endswith((".g6", ".graph6")) else "edgelist"
    if fmt == "graph6":
        line = raw.strip().splitlines()[0] if raw.strip() else b""
        return parse_graph6(line)
    return parse_edge_list(raw.decode())


# traversals ------------------------------------------------------------------

def spanning_forest(g: Graph) -> set[int]:
    """BFS forest from the lowest unvisited vertex, neighbours in id order."""
    seen = [False] * g.n
    out: set[int] = set()
    for r in range(g.n):
        if seen[r]:
            continue
        seen[r] = True
        q = deque([r])
        while q:
            u = q.popleft()
            for w in g.neighbours(u):
                if not seen[w]:
                    seen[w] = True
                    out.add(g.edge_id(u, w))
                    q.append(w)
    return out


def shortest_path(g: Graph, u: int, v: int, forbidden_internal: Iterable[int] = ()) -> VertexPath | None:
    forb = set(forbidden_internal)
    if u == v:
        return VertexPath((u,), ())
    parent = {u: None}
    q = deque([u])
    while q:
        x = q.popleft()
        for w in g.neighbours(x):
            if w in parent:
                continue
            if w == v:
                parent[w] = x
                path = [w]
                while parent[path[-1]] is not None:
                    path.append(parent[path[-1]])
                return VertexPath.from_vertices(g, path[::-1])
            if w in forb:
                continue
            parent[w] = x
            q.append(w)
    return None


def connected_components(g: Graph, vertices: Iterable[int] | None = None) -> list[list[int]]:
    """Components (optionally of the induced subgraph), each sorted, ordered by minimum."""
    allowed = set(range(g.n)) if vertices is None else set(vertices)
    seen: set[int] = set()
    comps = []
    for r in sorted(allowed):
        if r in seen:
            continue
        seen.add(r)
        comp = [r]
        stack = [r]
        while stack:
            x = stack.pop()
            for w in g.neighbours(x):
                if w in allowed and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def is_forest(g: Graph, edge_ids: Iterable[int]) -> bool:
    parent = list(range(g.n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edge_ids:
        a, b = (find(x) for x in g.edges[e])
        if a == b:
            return False
        parent[a] = b
    return True


def connecting_forest(g: Graph, parts: Sequence[Iterable[int]]) -> set[int]:
    """Edges T such that contracting every part, T is a spanning tree of the result.

    Vertices outside every part act as singleton parts.  Only edges with
    endpoints in different classes are chosen, so T closes no cycle together
    with forests of the parts.
    """
    if len(connected_components(g)) > 1:
        raise ValueError("connecting_forest requires a connected graph")
    cls = list(range(g.n))
    seen_v: set[int] = set()
    for p in parts:
        p = sorted(set(p))
        if not p:
            continue
        if seen_v & set(p):
            raise ValueError("parts must be pairwise disjoint")
        seen_v |= set(p)
        for v in p:
            cls[v] = g.n + p[0]
    # BFS over classes so the result is deterministic
    members: dict[int, list[int]] = {}
    for v in range(g.n):
        members.setdefault(cls[v], []).append(v)
    start = cls[0]
    done = {start}
    q = deque([start])
    out: set[int] = set()
    while q:
        c = q.popleft()
        for x in members[c]:
            for w in g.neighbours(x):
                if cls[w] not in done:
                    done.add(cls[w])
                    out.add(g.edge_id(x, w))
                    q.append(cls[w])
    return out
