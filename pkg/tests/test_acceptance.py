"""One test per acceptance criterion; each prints a PASS/FAIL line and records it for the summary."""
import random
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction
from pathlib import Path

import networkx as nx

from basisnum.captured import captured_adhesion_basis, default_path_family
from basisnum.combinators import (
    add_edges_fallback,
    add_vertex,
    combine_components,
    combine_union,
    delete_edges,
    split_small_separator,
    star_family,
)
from basisnum.cyclespace import CycleSpaceError, girth, girth_lower_bound
from basisnum.decomposition import hypertorso_of_prefix, make_sane
from basisnum.generators import clique, complete_bipartite, cycle, random_letter, random_pathwidth, random_td, random_tree
from basisnum.graph import read_graph
from basisnum.oracle import exact_basis_number, verify_certificate
from basisnum.pipeline import bn_path_decomposition, derivation_nodes
from basisnum.semigroup import (
    abstraction,
    check_tree,
    factorise,
    glue,
    glue_all,
    hat,
    product,
    word_from_path_decomposition,
)
from basisnum.thin import (
    BagFamily,
    check_thinness,
    grow_prefix,
    menger_two_paths,
    substitute,
    trivial_witness,
)

import instances as inst
from acceptance_log import record
from helpers import brute_cutedges, gf2_rank, is_path_of, mask_to_set, random_graph, random_network, uf_components
from test_thin import grow_cases, random_k

ROOT = Path(__file__).resolve().parent.parent
FIX = ROOT / "fixtures"


def dim(g):
    return g.m - g.n + len(uf_components(g.n, g.edges))


def recount(members):
    load = Counter(e for x in members for e in mask_to_set(x))
    return max(load.values(), default=0)


def independent_ok(g, members, claimed):
    """Rank by set elimination and congestion by direct count, apart from the library."""
    sets = [mask_to_set(x) for x in members]
    for s in sets:
        deg = Counter(v for e in s for v in g.edges[e])
        if any(d % 2 for d in deg.values()):
            return "member is not an F2-cycle"
    if gf2_rank(sets) != dim(g):
        return f"rank {gf2_rank(sets)} != {dim(g)}"
    if recount(members) > claimed:
        return f"congestion {recount(members)} > claimed {claimed}"
    return None


# 1 ----------------------------------------------------------------------------------

def test_criterion_1_oracle_ground_truth():
    rng = random.Random(1001)
    cases = [("K5", read_graph(str(FIX / "k5.g6")), lambda b: b == 3),
             ("K3,3", read_graph(str(FIX / "k33.g6")), lambda b: b >= 3),
             ("K3,3 generated", complete_bipartite(3, 3), lambda b: b >= 3),
             ("K4", read_graph(str(FIX / "k4.g6")), lambda b: b == 2),
             ("K5 generated", clique(5), lambda b: b == 3)]
    cases += [(f"C{n}", cycle(n), lambda b: b == 1) for n in range(3, 9)]
    cases += [(f"tree{i}", random_tree(rng.randint(1, 15), rng), lambda b: b == 0) for i in range(10)]
    cases += [("path7", read_graph(str(FIX / "path7.g6")), lambda b: b == 0)]
    bad, slowest = [], 0.0
    for name, g, want in cases:
        t0 = time.perf_counter()
        r = exact_basis_number(g)
        dt = time.perf_counter() - t0
        slowest = max(slowest, dt)
        if r.timed_out or dt >= 60 or not want(r.bn):
            bad.append(f"{name}: bn={r.bn} timed_out={r.timed_out} {dt:.1f}s")
            continue
        ok, reason = verify_certificate(g, r.witness)
        err = independent_ok(g, r.witness.family.members, r.bn)
        if not ok or err or recount(r.witness.family.members) != r.bn:
            bad.append(f"{name}: witness {reason} {err}")
    record(1, bad, f"{len(cases)} instances exact, slowest {slowest:.2f}s")
    assert not bad


# 2 ----------------------------------------------------------------------------------

def nx_lower_bound(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    cyc = nx.minimum_cycle_basis(h)
    if not cyc:
        return Fraction(0)
    gi = min(len(c) for c in cyc)
    return (1 - Fraction(g.n, g.m)) * gi


def test_criterion_2_girth_bound():
    rng = random.Random(1002)
    graphs = [(p.name, read_graph(str(p))) for p in sorted(FIX.glob("*.g6"))]
    for i in range(200):
        n = rng.randint(1, 9)
        graphs.append((f"random{i}", random_graph(rng, n, rng.uniform(0.2, 0.9))))
    bad = []
    forests = 0
    for name, g in graphs:
        if girth(g) is None:
            # the bound is undefined without a cycle; bn must then be 0
            forests += 1
            try:
                girth_lower_bound(g)
                bad.append(f"{name}: bound defined on a forest")
            except CycleSpaceError:
                pass
            if exact_basis_number(g).bn != 0:
                bad.append(f"{name}: forest with nonzero bn")
            continue
        lb = girth_lower_bound(g)
        if lb != nx_lower_bound(g):
            bad.append(f"{name}: bound {lb} != independent {nx_lower_bound(g)}")
        r = exact_basis_number(g)
        if r.timed_out or lb > r.bn:
            bad.append(f"{name}: bound {lb} > bn {r.bn}")
    record(2, bad, f"{len(graphs)} graphs ({forests} forests), bound <= exact bn")
    assert not bad


# 3 ----------------------------------------------------------------------------------

def test_criterion_3_captured_adhesion():
    rng = random.Random(1003)
    t0 = time.perf_counter()
    bad = []
    for i in range(200):
        g, td = random_td(rng.randint(3, 22), rng, width=rng.randint(1, 4), p=rng.uniform(0.2, 0.9))
        if rng.random() < 0.5:
            td = make_sane(g, td)
        bases = {}
        for t in td.preorder:
            tg, _ = td.torso(g, t)
            bases[t] = exact_basis_number(tg).witness.family.members
        pf = default_path_family(g, td)
        cert = captured_adhesion_basis(g, td, bases, pf)
        b = max((recount(x) for x in bases.values()), default=0)
        c = max(Counter(e for p in pf.entries.values() for e in p.edge_ids).values(), default=0)
        bound = (2 * c + 1) * (b + 1)
        err = independent_ok(g, cert.family.members, bound)
        if err:
            bad.append(f"instance {i}: {err}")
        if (cert.details["b"], cert.details["c"]) != (b, c):
            bad.append(f"instance {i}: reported b, c {(cert.details['b'], cert.details['c'])} != {(b, c)}")
    dt = time.perf_counter() - t0
    if dt >= 300:
        bad.append(f"took {dt:.0f}s")
    record(3, bad, f"200 instances in {dt:.1f}s, measured <= (2c+1)(b+1)")
    assert not bad


# 4 ----------------------------------------------------------------------------------

RUNNERS = {
    "combine_union": (inst.union_instance, lambda i: combine_union(*i)),
    "add_vertex": (inst.add_vertex_instance, lambda i: add_vertex(*i)),
    "add_edges_fallback": (inst.add_edges_instance, lambda i: add_edges_fallback(*i)),
    "delete_edges": (inst.delete_edges_instance, lambda i: delete_edges(*i)),
    "split_small_separator": (inst.small_separator_instance, lambda i: split_small_separator(*i)),
    "combine_components": (inst.components_instance, lambda i: combine_components(*i)),
}


def test_criterion_4_combinators():
    rng = random.Random(1004)
    bad = []
    for name, (make, run) in RUNNERS.items():
        for i in range(100):
            args = make(rng)
            cert = run(args)
            g = cert.family.graph
            ok, reason = verify_certificate(g, cert)
            err = independent_ok(g, cert.family.members, cert.claimed_congestion)
            if not ok or err:
                bad.append(f"{name} #{i}: {reason} {err}")
            if name == "add_vertex":
                hg, v, _ = args
                star = star_family(hg, v)
                if recount(star) > 2:
                    bad.append(f"add_vertex #{i}: star congestion {recount(star)}")
    record(4, bad, "6 x 100 instances verify, star families <= 2")
    assert not bad


# 5 ----------------------------------------------------------------------------------

def test_criterion_5_semigroup_laws():
    rng = random.Random(1005)
    bad = []
    for i in range(500):
        k = rng.randint(1, 3)
        a, b, c = (random_letter(k, rng) for _ in range(3))
        if abstraction(glue(a, b)) != product(abstraction(a), abstraction(b)):
            bad.append(f"#{i}: homomorphism")
        x, y, z = abstraction(a), abstraction(b), abstraction(c)
        if product(product(x, y), z) != product(x, product(y, z)):
            bad.append(f"#{i}: associativity")
        if abstraction(glue(glue(a, b), c)) != abstraction(glue(a, glue(b, c))):
            bad.append(f"#{i}: glue associativity after abstraction")
    record(5, bad, "500 instances, arity <= 3")
    assert not bad


# 6 ----------------------------------------------------------------------------------

def closure(values):
    # brute-force: every product of a nonempty word over the letters
    gens = set(values)
    out, frontier = set(gens), set(gens)
    while frontier:
        frontier = {product(a, g) for a in frontier for g in gens} - out
        out |= frontier
    return out


def own_check(t, values):
    """Recompute a tree bottom-up apart from the library checker."""
    if t.kind == "leaf":
        return [t.start] if t.value == values[t.start] else None
    leaves = []
    for ch in t.children:
        sub = own_check(ch, values)
        if sub is None:
            return None
        leaves += sub
    acc = t.children[0].value
    for ch in t.children[1:]:
        acc = product(acc, ch.value)
    if acc != t.value:
        return None
    if t.kind == "binary" and len(t.children) != 2:
        return None
    if t.kind == "idempotent":
        e = t.children[0].value
        if len(t.children) < 2 or any(ch.value != e for ch in t.children) or product(e, e) != e:
            return None
    return leaves


def test_criterion_6_factorisation():
    rng = random.Random(1006)
    bad = []
    worst = 0.0
    for i in range(200):
        k = rng.randint(1, 2)
        alphabet = [abstraction(random_letter(k, rng)) for _ in range(rng.randint(1, 5))]
        values = [rng.choice(alphabet) for _ in range(rng.randint(1, 200))]
        t = factorise(values)
        ok, msg = check_tree(t, values)
        if not ok or own_check(t, values) != list(range(len(values))):
            bad.append(f"word {i}: tree check {msg}")
        s = len(closure(values))
        if t.height > 3 * s:
            bad.append(f"word {i}: height {t.height} > 3*{s}")
        worst = max(worst, t.height / (3 * s))
    record(6, bad, f"200 words, max height/(3|S_reach|) = {worst:.2f}")
    assert not bad


# 7 ----------------------------------------------------------------------------------

def test_criterion_7_pipeline():
    rng = random.Random(1007)
    bad = []
    small = 0
    nodes = 0
    for i in range(50):
        k = rng.randint(1, 3)
        n = rng.randint(3, 60) if i % 3 else rng.randint(3, 9)
        g, pd = random_pathwidth(n, k, rng)
        cert = bn_path_decomposition(g, pd, k)
        err = independent_ok(g, cert.family.members, cert.claimed_congestion)
        if err:
            bad.append(f"graph {i}: {err}")
        word = word_from_path_decomposition(g, pd, k)
        for d in derivation_nodes(cert.details["derivation"]):
            nodes += 1
            if not (d["ok"] and d["rank"] == d["dim"] and d["measured"] <= d["claimed"]):
                bad.append(f"graph {i}: node {d['step']} {d.get('span')}")
            if "span" in d:
                a, b = d["span"]
                sub, _ = hat(glue_all(word[a:b], shared=True)).to_graph()
                if sub.n <= 9:
                    small += 1
                    if d["claimed"] < exact_basis_number(sub).bn:
                        bad.append(f"graph {i}: node {a}..{b} claims {d['claimed']} below the optimum")
        if g.n <= 9:
            small += 1
            if cert.claimed_congestion < exact_basis_number(g).bn:
                bad.append(f"graph {i}: claimed below the optimum")
    record(7, bad, f"50 graphs, {nodes} recursion nodes, {small} sub-instances checked against the oracle")
    assert not bad


# 8 ----------------------------------------------------------------------------------

def test_criterion_8_thin_networks():
    rng = random.Random(1008)
    t0 = time.perf_counter()
    bad = []
    for i in range(100):
        net = random_network(rng)
        p1, p2 = menger_two_paths(net)
        if not all(is_path_of(net.h, net.s, net.t, list(p.vertices), list(p.edges)) for p in (p1, p2)):
            bad.append(f"network {i}: not a path")
        if set(p1.edges) & set(p2.edges) != brute_cutedges(net):
            bad.append(f"network {i}: shared hyperedges differ from the cutedges")
    chains = steps = 0
    k = 3
    while chains < 20:
        net = random_network(rng, k=k)
        bags, w, nxt, done = [net.h.vertices], trivial_witness(net), max(net.h.vertices) + 1, 0
        while done < 10 and w.cutedges:
            e = rng.choice(w.cutedges)
            K = random_k(rng, net.h.hyperedges[e], nxt, k)
            nxt = max(K.vertices) + 1
            bags.append(K.vertices)
            fam = BagFamily(bags)
            net, w = substitute(net, e, K, w, k, fam)
            if not check_thinness(net, w, k, fam).ok:
                bad.append(f"chain {chains}: witness broken at step {done}")
            if len(net.h.vertices) <= 14 and set(w.cutedges) != brute_cutedges(net):
                bad.append(f"chain {chains}: cutedges wrong at step {done}")
            done += 1
        steps += done
        chains += done == 10
    grown = iters = 0
    for g, td, u, v in grow_cases(rng, 120):
        r = grow_prefix(g, td, u, v)
        iters += len(r.trace)
        if not all(s["thin"] for s in r.trace):
            bad.append(f"grow {u}-{v}: invariant broken")
        hts = hypertorso_of_prefix(g, td, r.prefix)
        if sorted(map(sorted, r.network.h.hyperedges)) != sorted(map(sorted, hts.hyperedges)):
            bad.append("grow: final network is not the hypertorso")
        graph_edges = sum(len(g.edge_subgraph_ids(td.bags[t])) for t in r.prefix) - sum(
            len(g.edge_subgraph_ids(td.adhesion(t))) for t in r.prefix if td.parent[t] is not None
        )
        if sum(x is None for x in r.labels) != graph_edges:
            bad.append("grow: labels do not match the graph edges of the prefix")
        shared = set(r.p1.edges) & set(r.p2.edges)
        if any(r.labels[i] is not None for i in shared):
            bad.append(f"grow {u}-{v}: final paths share an adhesion hyperedge")
        grown += len(r.prefix) > 1
    dt = time.perf_counter() - t0
    if dt >= 300:
        bad.append(f"took {dt:.0f}s")
    if not grown:
        bad.append("no prefix ever grew")
    record(8, bad, f"100 networks, {chains} chains / {steps} substitutions, {iters} grow iterations ({grown} grown) in {dt:.1f}s")
    assert not bad


# 9 ----------------------------------------------------------------------------------

def f(name):
    return str(FIX / name)


def test_criterion_9_cli_determinism(tmp_path):
    cert = tmp_path / "cert.json"
    subprocess.run([sys.executable, "-m", "basisnum.cli", "construct", "--tree-paths", f("diamond_td.json"), f("diamond.g6"), "-o", str(cert)], check=True)
    commands = [
        ["exact", f("k5.g6"), f("petersen.g6"), "--jobs", "2"],
        ["lowerbound", f("petersen.g6"), f("path7.g6")],
        ["construct", "--tree-paths", f("diamond_td.json"), f("diamond_paths.json"), f("diamond.g6")],
        ["construct", "--path-decomp", f("ladder6_pd.json"), f("ladder6.g6")],
        ["verify", str(cert)],
        ["thin-check", f("descent_network.json"), f("descent_witness.json"), "--bags", f("descent_bags.json"), "--k", "2"],
        ["grow-prefix", f("descent_td.json"), f("descent.g6"), "0", "1"],
        ["factorise", "--random", "120", "--tree"],
        ["factorise", f("ladder6_pd.json"), f("ladder6.g6")],
    ] + [["gen", kind, "10", "--k", "2"] for kind in ["clique", "cycle", "ladder", "apex-cubic", "random-pathwidth", "random-td"]]
    bad = []
    runs = 0
    for argv in commands:
        for mode in ([], ["--json"]):
            full = [sys.executable, "-m", "basisnum.cli", "--seed", "17", *mode, *argv]
            a = subprocess.run(full, capture_output=True)
            b = subprocess.run(full, capture_output=True)
            runs += 2
            if a.returncode != 0 or (a.returncode, a.stdout, a.stderr) != (b.returncode, b.stdout, b.stderr):
                bad.append(" ".join(argv[:2]) + f" {mode}: exit {a.returncode}/{b.returncode}")
    # file outputs as well
    outs = []
    for j in range(2):
        out = tmp_path / f"r{j}"
        subprocess.run([sys.executable, "-m", "basisnum.cli", "--seed", "5", "gen", "random-td", "14", "-o", str(out)], check=True)
        c = tmp_path / f"c{j}.json"
        subprocess.run([sys.executable, "-m", "basisnum.cli", "construct", "--tree-paths", str(out) + ".json", str(out) + ".g6", "-o", str(c)], check=True)
        outs.append((Path(str(out) + ".g6").read_bytes(), Path(str(out) + ".json").read_bytes(), c.read_bytes()))
    if outs[0] != outs[1]:
        bad.append("written files differ between runs")
    record(9, bad, f"{len(commands)} commands x 2 output modes, {runs} runs, byte-identical")
    assert not bad
