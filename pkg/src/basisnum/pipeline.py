"""Certified generating families along bounded-adhesion path-decompositions.

Every intermediate object is a bi-interface graph whose vertex ids come from
one shared namespace (the input graph's ids).  A certificate "of hat(G)" is
hosted on ``hat(G).to_graph()[0]``.  Each node of the recursion stores its
derivation (combination step, composed claimed bound, measured congestion, rank) in
``details["derivation"]``.
"""
from __future__ import annotations

from collections import deque
from itertools import combinations
from typing import Callable, Sequence

from .captured import CapturingPathFamily, captured_adhesion_basis, path_family_congestion
from .combinators import add_edges_fallback, add_vertex, split_small_separator
from .cyclespace import BasisCertificate, CycleFamily, congestion, edge_ids, make_certificate
from .decomposition import PathDecomposition, validate
from .graph import Graph, Separation, VertexPath, connected_components
from .oracle import exact_basis_number
from .semigroup import (
    BiInterfaceGraph,
    FactorisationTree,
    abstraction,
    factorise,
    glue_all,
    glue_shared,
    hat,
    persistent_vertices,
    product,
    word_from_path_decomposition,
)

__all__ = [
    "PipelineError",
    "binary_combine",
    "idempotent_combine",
    "basis_from_tree",
    "bn_path_decomposition",
    "oracle_provider",
    "derivation_nodes",
]


class PipelineError(ValueError):
    pass


Provider = Callable[[Graph], "BasisCertificate | Sequence[int]"]


def _transfer(members: Sequence[int], src: Graph, src_vs: Sequence[int], dst: Graph, dst_vs: Sequence[int]) -> list[int]:
    """Re-express edge sets of ``src`` (labels src_vs) over the edge ids of ``dst``."""
    pos = {v: i for i, v in enumerate(dst_vs)}
    out = []
    for x in members:
        y = 0
        for e in edge_ids(x):
            a, b = src.edges[e]
            y |= 1 << dst.edge_id(pos[src_vs[a]], pos[src_vs[b]])
        out.append(y)
    return out


def _expect(cert: BasisCertificate, bg: BiInterfaceGraph, name: str) -> tuple[Graph, list[int]]:
    lg, vs = bg.to_graph()
    if cert.family.graph != lg:
        raise PipelineError(f"{name}: certificate is not hosted on the hat graph")
    if not cert.ok:
        raise PipelineError(f"{name}: {cert.failure()}")
    return lg, vs


def _derivation(step: str, cert: BasisCertificate, children: list, **extra) -> dict:
    d = {
        "step": step,
        "claimed": cert.claimed_congestion,
        "measured": cert.measured_congestion,
        "rank": cert.rank,
        "dim": cert.cycle_space_dim,
        "ok": cert.ok,
    }
    d.update(extra)
    d["children"] = children
    return d


def _child_derivation(cert: BasisCertificate) -> dict:
    return cert.details.get("derivation") or _derivation("given", cert, [])


def _with_edges(bg: BiInterfaceGraph, extra) -> BiInterfaceGraph:
    return BiInterfaceGraph(bg.vertices, bg.edges | frozenset(extra), bg.lam, bg.rho)


def binary_combine(g1: BiInterfaceGraph, g2: BiInterfaceGraph, b1: BasisCertificate, b2: BasisCertificate) -> BasisCertificate:
    """Certificate of hat(g1 ⊙ g2) from certificates of hat(g1) and hat(g2).

    Vertices persistent in a factor but not in the glueing are added back one
    at a time (+2 each), then the two sides are joined across their common
    interface with the small-separator combination.
    """
    G = glue_shared(g1, g2)
    pi = persistent_vertices(G)
    H = hat(G)
    hg, hvs = H.to_graph()
    sides = []
    for name, gi, bi in (("left", g1, b1), ("right", g2, b2)):
        lg, vs = _expect(bi, hat(gi), f"{name} factor")
        cur = hat(gi)
        fam = list(bi.family.members)
        claimed = bi.claimed_congestion
        added = []
        for v in sorted(persistent_vertices(gi) - pi):
            nxt = gi.induced(cur.vertices | {v})
            ng, nvs = nxt.to_graph()
            cert = add_vertex(ng, nvs.index(v), _transfer(fam, lg, vs, ng, nvs))
            fam, cur, lg, vs = list(cert.family.members), nxt, ng, nvs
            claimed += 2
            added.append(v)
        # edges of hat(G) among this side's vertices that the side lacks
        extra = sorted(e for e in H.induced(cur.vertices).edges if e not in cur.edges)
        if extra:
            full = _with_edges(cur, extra)
            fg, fvs = full.to_graph()
            pos = {v: i for i, v in enumerate(fvs)}
            a = [fg.edge_id(pos[u], pos[v]) for u, v in extra]
            cert = add_edges_fallback(fg, a, _transfer(fam, lg, vs, fg, fvs))
            fam, cur, lg, vs = list(cert.family.members), full, fg, fvs
            claimed += len(extra)
        sides.append((cur, lg, vs, _transfer(fam, lg, vs, hg, hvs), claimed, added, extra))
    (c1, _, _, f1, cl1, add1, ex1), (c2, _, _, f2, cl2, add2, ex2) = sides
    if c1.edges | c2.edges != H.edges or c1.vertices | c2.vertices != H.vertices:
        raise PipelineError("internal error: hat of the glueing is not the glueing of the reduced factors")
    pos = {v: i for i, v in enumerate(hvs)}
    sep = Separation(frozenset(pos[v] for v in c1.vertices), frozenset(pos[v] for v in c2.vertices))
    k_sep = sep.order
    res = split_small_separator(hg, sep, f1, f2)
    claimed = cl1 + cl2 + 2 * max(k_sep - 1, 0)
    k = g1.k
    cert = make_certificate(
        hg, res.family.members, claimed,
        ideal=b1.claimed_congestion + b2.claimed_congestion + 4 * k + 2 * max(k - 1, 0),
        note="binary glueing",
    )
    cert.details["derivation"] = _derivation(
        "binary", cert, [_child_derivation(b1), _child_derivation(b2)],
        added_back=[add1, add2], extra_edges=[len(ex1), len(ex2)], separator_order=k_sep,
    )
    return cert


def _bfs_path(adj: dict[int, list[int]], a: int, b: int) -> list[int] | None:
    prev = {a: None}
    q = deque([a])
    while q:
        u = q.popleft()
        if u == b:
            out = [b]
            while prev[out[-1]] is not None:
                out.append(prev[out[-1]])
            return out[::-1]
        for w in adj.get(u, ()):
            if w not in prev:
                prev[w] = u
                q.append(w)
    return None


def idempotent_combine(factors: Sequence[BiInterfaceGraph], bases: Sequence[BasisCertificate]) -> BasisCertificate:
    """Certificate of hat(G1 ⊙ ... ⊙ Gm) for factors sharing one idempotent abstraction.

    Per component C of the glued hat graph, the bags hat(X_i) ∩ C form a
    path-decomposition whose adhesion pairs are captured by BFS paths inside
    two consecutive factors; torso bases extend the factor bases by the
    adhesion-clique edges, and the captured-adhesion construction finishes.
    """
    m = len(factors)
    if m == 0 or len(bases) != m:
        raise PipelineError("need one basis per factor and at least one factor")
    e = abstraction(factors[0])
    for i, f in enumerate(factors):
        if abstraction(f) != e:
            raise PipelineError(f"factor {i} has a different abstraction")
    if product(e, e) != e:
        raise PipelineError("common abstraction is not idempotent")
    hosts = [_expect(b, hat(f), f"factor {i}") for i, (f, b) in enumerate(zip(factors, bases))]
    G = glue_all(factors, shared=True)
    pi = persistent_vertices(G)
    for i, f in enumerate(factors):
        if persistent_vertices(f) != pi:
            raise PipelineError(f"idempotence premise violated: factor {i} has other persistent vertices")
    hats = [hat(f) for f in factors]
    H = hat(G)
    glued = glue_all(hats, shared=True)
    if glued.vertices != H.vertices or glued.edges != H.edges:
        raise PipelineError("idempotence premise violated: hat does not commute with glueing")
    k = factors[0].k
    hg, hvs = H.to_graph()
    X = [h.vertices for h in hats]

    members: list[int] = []
    claimed = 0
    comp_info = []
    for comp in connected_components(hg):
        C = frozenset(hvs[v] for v in comp)
        idx = [i for i in range(m) if X[i] & C]
        if idx != list(range(idx[0], idx[-1] + 1)):
            raise PipelineError("internal error: component meets non-consecutive factors")
        sub = H.induced(C)
        cg, cvs = sub.to_graph()
        cpos = {v: i for i, v in enumerate(cvs)}
        pd = PathDecomposition([frozenset(cpos[v] for v in X[i] & C) for i in idx])
        pf = CapturingPathFamily()
        for t in range(1, len(idx)):
            i = idx[t]
            adj = {v: [] for v in X[i - 1] | X[i]}
            for u, v in sorted(hats[i - 1].edges | hats[i].edges):
                adj[u].append(v)
                adj[v].append(u)
            for x, y in combinations(sorted(pd.adhesion(t)), 2):
                p = _bfs_path(adj, cvs[x], cvs[y])
                if p is None:
                    raise PipelineError(
                        f"idempotence premise violated: no path {cvs[x]}-{cvs[y]} inside factors {i - 1} and {i}"
                    )
                pf.set(t, x, y, VertexPath.from_vertices(cg, [cpos[v] for v in p]))
        c = path_family_congestion(pf, cg.m)
        if c > 2 * k * k:
            raise PipelineError(f"capturing paths have congestion {c} > 2k^2 = {2 * k * k}")
        torso_bases = {}
        b_torso = 0
        for t, i in enumerate(idx):
            tg, tv = pd.torso(cg, t)
            tvs = [cvs[v] for v in tv]
            part = hats[i].induced(X[i] & C)
            lg, vs = hosts[i]
            lpos = {v: j for j, v in enumerate(vs)}
            cmask = 0
            for u, v in part.edges:
                cmask |= 1 << lg.edge_id(lpos[u], lpos[v])
            # factor cycles split along components of the factor; keep those in C
            base = [x & cmask for x in bases[i].family.members if x & cmask]
            base = _transfer(base, lg, vs, tg, tvs)
            extra = [j for j, (a, b) in enumerate(tg.edges) if tuple(sorted((tvs[a], tvs[b]))) not in part.edges]
            cert = add_edges_fallback(tg, extra, base)
            torso_bases[t] = list(cert.family.members)
            b_torso = max(b_torso, bases[i].claimed_congestion + len(extra))
        cap = captured_adhesion_basis(cg, pd, torso_bases, pf)
        if not cap.ok:
            raise PipelineError(f"captured-adhesion basis failed on a component: {cap.failure()}")
        claimed = max(claimed, (2 * c + 1) * (b_torso + 1))
        members.extend(_transfer(cap.family.members, cg, cvs, hg, hvs))
        comp_info.append({"size": len(C), "bags": len(idx), "path_congestion": c, "torso_bound": b_torso})
    b_in = max(b.claimed_congestion for b in bases)
    cert = make_certificate(
        hg, members, claimed,
        ideal=(4 * k * k + 1) * (b_in + k * k + 1),
        note="idempotent glueing",
    )
    cert.details["derivation"] = _derivation(
        "idempotent", cert, [_child_derivation(b) for b in bases], components=comp_info,
    )
    return cert


def _segment(letters: Sequence[BiInterfaceGraph], t: FactorisationTree) -> BiInterfaceGraph:
    return glue_all(letters[t.start:t.end], shared=True)


def basis_from_tree(
    tree: FactorisationTree,
    letters: Sequence[BiInterfaceGraph],
    leaf_bases: Sequence[BasisCertificate],
) -> BasisCertificate:
    """Certificate of hat(glueing of letters) following the factorisation tree.

    Letters must share one vertex namespace (see ``embed_word``).  Every
    internal node's certificate is checked as soon as it is built.
    """

    def rec(t: FactorisationTree, where: str) -> BasisCertificate:
        if t.kind == "leaf":
            cert = leaf_bases[t.start]
            _expect(cert, hat(letters[t.start]), f"leaf {t.start}")
            if "derivation" not in cert.details:
                cert.details["derivation"] = _derivation("leaf", cert, [], span=[t.start, t.end])
            return cert
        kids = [rec(c, f"{where}.{j}") for j, c in enumerate(t.children)]
        segs = [_segment(letters, c) for c in t.children]
        try:
            if t.kind == "binary":
                cert = binary_combine(segs[0], segs[1], kids[0], kids[1])
            else:
                cert = idempotent_combine(segs, kids)
        except PipelineError as exc:
            raise PipelineError(f"node {where} ({t.kind}, letters {t.start}..{t.end - 1}): {exc}") from None
        cert.details["derivation"]["span"] = [t.start, t.end]
        if not cert.ok:
            raise PipelineError(f"node {where} ({t.kind}): {cert.failure()}")
        return cert

    return rec(tree, "root")


def oracle_provider(budget: int | None = None) -> Provider:
    """Part bases from the exact oracle; exceeding the budget is an error."""

    def provide(g: Graph) -> BasisCertificate:
        res = exact_basis_number(g, budget=budget)
        if res.timed_out:
            raise PipelineError(f"exact oracle exceeded its budget on a part with {g.n} vertices")
        return res.witness

    return provide


def _leaf_certificate(provider: Provider, hg: Graph, i: int) -> BasisCertificate:
    try:
        got = provider(hg)
    except PipelineError as exc:
        raise PipelineError(f"bag {i}: {exc}") from None
    if isinstance(got, BasisCertificate):
        if got.family.graph != hg:
            raise PipelineError(f"bag {i}: provider certificate is hosted on another graph")
        cert = got
    else:
        fam = list(got.members if isinstance(got, CycleFamily) else got)
        cert = make_certificate(hg, fam, congestion(fam, hg.m))
    if not cert.ok:
        raise PipelineError(f"bag {i}: provider family fails: {cert.failure()}")
    return cert


def bn_path_decomposition(
    g: Graph,
    pd: PathDecomposition,
    k: int,
    provider: Provider | None = None,
) -> BasisCertificate:
    """Certified generating family of g from a path-decomposition of adhesion <= k."""
    diag = validate(g, pd)
    if not diag.ok:
        raise PipelineError(f"invalid path-decomposition: {diag.message}")
    provider = provider or oracle_provider()
    word = word_from_path_decomposition(g, pd, k)
    leaves = []
    for i, letter in enumerate(word):
        hg, _ = hat(letter).to_graph()
        cert = _leaf_certificate(provider, hg, i)
        leaves.append(make_certificate(hg, cert.family.members, cert.claimed_congestion, note="part basis"))
    values = [abstraction(x) for x in word]
    tree = factorise(values)
    cert = basis_from_tree(tree, word, leaves)
    G = glue_all(word, shared=True)
    cur = hat(G)
    lg, vs = cur.to_graph()
    fam = list(cert.family.members)
    claimed = cert.claimed_congestion
    for v in sorted(persistent_vertices(G)):
        nxt = G.induced(cur.vertices | {v})
        ng, nvs = nxt.to_graph()
        step = add_vertex(ng, nvs.index(v), _transfer(fam, lg, vs, ng, nvs))
        fam, cur, lg, vs = list(step.family.members), nxt, ng, nvs
        claimed += 2
    fam = _transfer(fam, lg, vs, g, range(g.n))
    out = make_certificate(g, fam, claimed, note="path-decomposition pipeline")
    out.details = {
        "k": k,
        "height": tree.height,
        "persistent": sorted(persistent_vertices(G)),
        "part_bound": max((x.claimed_congestion for x in leaves), default=0),
        "asymptotic_bound": "b * 2^(2^O(k^2))",
        "derivation": _derivation("add persistent vertices", make_certificate(g, fam, claimed), [_child_derivation(cert)]),
    }
    if not out.ok:
        raise PipelineError(f"final certificate fails: {out.failure()}")
    return out


def derivation_nodes(d: dict):
    """All nodes of a derivation tree, root first."""
    stack = [d]
    while stack:
        x = stack.pop()
        yield x
        stack.extend(reversed(x.get("children", [])))
