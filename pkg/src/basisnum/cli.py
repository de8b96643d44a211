"""Command-line front-end ``bn``.

Exit codes: 0 all checks pass, 1 a certificate or check failed, 2 usage or
parse error.  ``--json`` switches to machine output (sorted keys, stable order).
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .captured import captured_adhesion_basis, default_path_family, pf_from_json
from .cyclespace import (
    BasisCertificate,
    CycleSpaceError,
    edge_ids,
    family_from_json,
    fundamental_cycles,
    girth,
    girth_lower_bound,
    make_certificate,
)
from .decomposition import PathDecomposition, TreeDecomposition, td_from_json, validate, width_and_adhesion
from .generators import (
    apex_over,
    clique,
    cycle,
    ladder,
    random_cubic,
    random_letter,
    random_pathwidth,
    random_td,
)
from .graph import Graph, GraphFormatError, encode_graph6, parse_graph6, read_graph
from .oracle import exact_basis_number, verify_certificate
from .pipeline import PipelineError, bn_path_decomposition, derivation_nodes
from .semigroup import abstraction, check_tree, factorise, reachable_subsemigroup, word_from_path_decomposition
from .thin import (
    BagFamily,
    ThinError,
    check_thinness,
    grow_prefix,
    network_from_dict,
    witness_from_dict,
)

__all__ = ["main", "run"]


class UsageError(Exception):
    pass


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None


def _graph(path: str) -> Graph:
    return read_graph(path)


def _path_decomposition(d) -> PathDecomposition:
    if isinstance(d, dict) and isinstance(d.get("bags"), list):
        return PathDecomposition(d["bags"])
    if isinstance(d, list):
        return PathDecomposition(d)
    td = td_from_json(d)
    order = td.preorder
    for t in order:
        if len(td.children[t]) > 1:
            raise UsageError(f"decomposition node {t} has several children: not a path")
    return PathDecomposition([td.bags[t] for t in order])


def certificate_document(g: Graph, cert: BasisCertificate, construction: str, extra: dict | None = None) -> dict:
    doc = {
        "kind": "basis-certificate",
        "construction": construction,
        "graph6": encode_graph6(g),
        "graph_hash": g.fingerprint(),
        "cycles": [edge_ids(x) for x in cert.family.members],
        "claimed_congestion": cert.claimed_congestion,
        "measured_congestion": cert.measured_congestion,
        "rank": cert.rank,
        "cycle_space_dim": cert.cycle_space_dim,
    }
    if extra:
        doc["details"] = extra
    return doc


def _certificate_from_document(doc: dict) -> tuple[Graph, BasisCertificate]:
    if doc.get("kind") != "basis-certificate":
        raise UsageError("not a basis certificate document")
    g = parse_graph6(doc["graph6"])
    fam = family_from_json(g, doc)
    cert = make_certificate(g, fam.members, int(doc["claimed_congestion"]))
    return g, cert


# commands ----------------------------------------------------------------------------

def _map(fn, items, jobs: int) -> list:
    # per-file parallelism; results come back in input order
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _exact_one(job: tuple[str, int | None]) -> dict:
    path, budget = job
    res = exact_basis_number(_graph(path), budget=budget)
    return {
        "file": path,
        "bn": res.bn,
        "timed_out": res.timed_out,
        "explored_nodes": res.explored_nodes,
        "witness": [edge_ids(x) for x in res.witness.family.members],
    }


def cmd_exact(args) -> tuple[int, object]:
    out = _map(_exact_one, [(p, args.budget) for p in args.graphs], args.jobs)
    if args.json:
        return 0, out[0] if len(out) == 1 else out
    lines = [f"{r['file']}: bn = {r['bn']}" + (" (upper bound, budget exhausted)" if r["timed_out"] else "") for r in out]
    return 0, "\n".join(lines)


def cmd_lowerbound(args) -> tuple[int, object]:
    out = []
    for path in args.graphs:
        g = _graph(path)
        gam = girth(g)
        lb = "0" if gam is None else str(girth_lower_bound(g))
        out.append({"file": path, "lower_bound": lb, "girth": gam, "n": g.n, "m": g.m})
    if args.json:
        return 0, out[0] if len(out) == 1 else out
    return 0, "\n".join(f"{r['file']}: {r['lower_bound']}" for r in out)


def _torso_bases(g: Graph, td: TreeDecomposition, how: str, budget: int | None) -> dict:
    bases = {}
    for t in td.preorder:
        tg, _ = td.torso(g, t)
        if how == "fundamental":
            bases[t] = fundamental_cycles(tg)
        else:
            res = exact_basis_number(tg, budget=budget)
            if res.timed_out:
                raise UsageError(f"exact oracle exceeded its budget on the torso of node {t}")
            bases[t] = list(res.witness.family.members)
    return bases


def cmd_construct(args) -> tuple[int, object]:
    files = args.files
    if args.tree_paths == args.path_decomp:
        raise UsageError("choose exactly one of --tree-paths or --path-decomp")
    g = _graph(files[-1])
    if args.tree_paths:
        if len(files) not in (2, 3):
            raise UsageError("usage: bn construct --tree-paths TD.json [PATHS.json] GRAPH")
        td = td_from_json(_load_json(files[0]))
        diag = validate(g, td)
        if not diag.ok:
            raise UsageError(f"invalid tree-decomposition: {diag.message}")
        pf = pf_from_json(g, _load_json(files[1])) if len(files) == 3 else default_path_family(g, td)
        cert = captured_adhesion_basis(g, td, _torso_bases(g, td, args.torso_bases, args.budget), pf)
        extra = {"b": cert.details["b"], "c": cert.details["c"], "bound": "(2c+1)(b+1)"}
        doc = certificate_document(g, cert, "tree-paths", extra)
    else:
        if len(files) != 2:
            raise UsageError("usage: bn construct --path-decomp PD.json GRAPH")
        pd = _path_decomposition(_load_json(files[0]))
        k = args.k if args.k is not None else max(width_and_adhesion(pd)[1], 0)
        provider = None
        if args.torso_bases == "fundamental":
            provider = fundamental_cycles
        cert = bn_path_decomposition(g, pd, k, provider)
        nodes = list(derivation_nodes(cert.details["derivation"]))
        extra = {
            "k": k,
            "height": cert.details["height"],
            "recursion_nodes": len(nodes),
            "all_nodes_ok": all(d["ok"] for d in nodes),
            "derivation": cert.details["derivation"],
        }
        doc = certificate_document(g, cert, "path-decomp", extra)
    ok, reason = verify_certificate(g, cert)
    doc["verified"] = ok
    text = _dump(doc)
    if args.out:
        Path(args.out).write_text(text + "\n")
        msg = f"certificate written to {args.out}: measured {cert.measured_congestion} <= claimed {cert.claimed_congestion}" if ok else reason
        return (0 if ok else 1), (doc if args.json else msg)
    return (0 if ok else 1), (doc if args.json else text)


def cmd_verify(args) -> tuple[int, object]:
    out = []
    code = 0
    for path in args.certificates:
        doc = _load_json(path)
        g, cert = _certificate_from_document(doc)
        if doc.get("graph_hash") != g.fingerprint():
            ok, reason = False, "graph_hash does not match the embedded graph"
        else:
            ok, reason = verify_certificate(g, cert)
        out.append({"file": path, "ok": ok, "reason": reason, "measured_congestion": cert.measured_congestion,
                    "claimed_congestion": cert.claimed_congestion})
        if not ok:
            code = 1
    if args.json:
        return code, out[0] if len(out) == 1 else out
    return code, "\n".join(f"{r['file']}: {'PASS' if r['ok'] else 'FAIL'} ({r['reason']})" for r in out)


def cmd_thin_check(args) -> tuple[int, object]:
    net = network_from_dict(_load_json(args.network))
    w = witness_from_dict(_load_json(args.witness))
    fam = BagFamily(_load_json(args.bags))
    d = check_thinness(net, w, args.k, fam)
    res = {"ok": d.ok, "clause": d.condition, "message": d.message}
    return (0 if d.ok else 1), (res if args.json else ("PASS" if d.ok else f"FAIL [{d.condition}] {d.message}"))


def cmd_grow_prefix(args) -> tuple[int, object]:
    g = _graph(args.graph)
    td = td_from_json(_load_json(args.td))
    if args.u not in td.bags[td.root] or args.v not in td.bags[td.root]:
        raise UsageError("u and v must lie in the root bag")
    res = grow_prefix(g, td, args.u, args.v, k=args.k)
    doc = res.to_dict()
    if args.json:
        return 0, doc
    return 0, f"prefix {doc['prefix']}, {len(doc['decomposition'])} bags, {len(doc['trace'])} iterations"


def cmd_factorise(args) -> tuple[int, object]:
    if args.random is not None:
        rng = random.Random(args.seed)
        alphabet = [random_letter(args.arity, rng) for _ in range(args.letters)]
        values = [abstraction(rng.choice(alphabet)) for _ in range(args.random)]
    else:
        if len(args.files) != 2:
            raise UsageError("usage: bn factorise PD.json GRAPH  or  bn factorise --random LENGTH")
        g = _graph(args.files[1])
        pd = _path_decomposition(_load_json(args.files[0]))
        k = args.k if args.k is not None else width_and_adhesion(pd)[1]
        values = [abstraction(x) for x in word_from_path_decomposition(g, pd, max(k, 0))]
    tree = factorise(values)
    ok, msg = check_tree(tree, values)
    s = len(reachable_subsemigroup(values))
    within = tree.height <= 3 * s
    doc = {"length": len(values), "height": tree.height, "reachable": s, "bound": 3 * s,
           "tree_ok": ok, "within_bound": within}
    if args.tree:
        doc["tree"] = tree.to_dict()
    code = 0 if ok and within else 1
    if args.json:
        return code, doc
    return code, f"length {len(values)}, height {tree.height} <= 3*|S_reach| = {3 * s}: {within}; tree {msg}"


def cmd_gen(args) -> tuple[int, object]:
    rng = random.Random(args.seed)
    dec = None
    kind, n = args.kind, args.n
    if kind == "clique":
        g = clique(n)
    elif kind == "cycle":
        g = cycle(n)
    elif kind == "ladder":
        g = ladder(n)
    elif kind == "apex-cubic":
        g = apex_over(random_cubic(n, rng))
    elif kind == "random-pathwidth":
        g, pd = random_pathwidth(n, args.k, rng)
        dec = {"bags": [sorted(b) for b in pd.bag_list]}
    elif kind == "random-td":
        g, td = random_td(n, rng, width=args.k)
        dec = td.to_dict()
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown generator {kind}")
    g6 = encode_graph6(g)
    if args.out:
        Path(args.out + ".g6").write_text(g6 + "\n")
        if dec is not None:
            Path(args.out + ".json").write_text(_dump(dec) + "\n")
    if args.json:
        doc = {"graph6": g6, "n": g.n, "m": g.m}
        if dec is not None:
            doc["decomposition"] = dec
        return 0, doc
    if args.out:
        return 0, f"wrote {args.out}.g6" + ("" if dec is None else f" and {args.out}.json")
    return 0, g6 if dec is None else g6 + "\n" + _dump(dec)


# parser --------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bn", description="Low-congestion cycle bases with certificates.")
    p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
    p.add_argument("--json", action="store_true", help="machine-readable JSON output")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS)

    sp = sub.add_parser("exact", help="exact basis number (small graphs)")
    sp.add_argument("graphs", nargs="+")
    sp.add_argument("--budget", type=int, default=None, help="search-node budget (default BN_BUDGET or 10^7)")
    sp.add_argument("--jobs", type=int, default=1, help="worker processes (output order is unaffected)")
    common(sp)
    sp.set_defaults(func=cmd_exact)

    sp = sub.add_parser("lowerbound", help="girth lower bound (1 - n/m) * girth")
    sp.add_argument("graphs", nargs="+")
    common(sp)
    sp.set_defaults(func=cmd_lowerbound)

    sp = sub.add_parser("construct", help="build and self-verify a certificate")
    mode = sp.add_mutually_exclusive_group(required=True)
    mode.add_argument("--tree-paths", action="store_true", help="files: TD.json [PATHS.json] GRAPH")
    mode.add_argument("--path-decomp", action="store_true", help="files: PD.json GRAPH")
    sp.add_argument("files", nargs="+")
    sp.add_argument("--k", type=int, default=None, help="arity for --path-decomp (default: adhesion)")
    sp.add_argument("--torso-bases", choices=["exact", "fundamental"], default="exact")
    sp.add_argument("--budget", type=int, default=None)
    sp.add_argument("-o", "--out", default=None)
    common(sp)
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("verify", help="recheck certificate files")
    sp.add_argument("certificates", nargs="+")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("thin-check", help="check a thinness witness")
    sp.add_argument("network")
    sp.add_argument("witness")
    sp.add_argument("--bags", required=True, help="JSON list of bags generating the family")
    sp.add_argument("--k", type=int, required=True)
    common(sp)
    sp.set_defaults(func=cmd_thin_check)

    sp = sub.add_parser("grow-prefix", help="grow a prefix with two low-sharing paths")
    sp.add_argument("td")
    sp.add_argument("graph")
    sp.add_argument("u", type=int)
    sp.add_argument("v", type=int)
    sp.add_argument("--k", type=int, default=None)
    common(sp)
    sp.set_defaults(func=cmd_grow_prefix)

    sp = sub.add_parser("factorise", help="factorisation tree of a word of abstractions")
    sp.add_argument("files", nargs="*", help="PD.json GRAPH")
    sp.add_argument("--random", type=int, default=None, metavar="LENGTH")
    sp.add_argument("--arity", type=int, default=2)
    sp.add_argument("--letters", type=int, default=3)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--tree", action="store_true", help="include the tree in the output")
    common(sp)
    sp.set_defaults(func=cmd_factorise)

    sp = sub.add_parser("gen", help="generate fixtures")
    sp.add_argument("kind", choices=["clique", "cycle", "ladder", "apex-cubic", "random-pathwidth", "random-td"])
    sp.add_argument("n", type=int)
    sp.add_argument("--k", type=int, default=2, help="pathwidth / adhesion parameter")
    sp.add_argument("-o", "--out", default=None, help="write OUT.g6 (and OUT.json)")
    common(sp)
    sp.set_defaults(func=cmd_gen)
    return p


def run(argv=None) -> tuple[int, str]:
    """Execute a command; returns (exit code, text written to stdout)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    try:
        code, payload = args.func(args)
    except (UsageError, GraphFormatError, FileNotFoundError, KeyError, json.JSONDecodeError) as exc:
        return 2, f"error: {exc}"
    except (CycleSpaceError, PipelineError, ThinError, ValueError) as exc:
        return 1, f"error: {exc}"
    text = _dump(payload) if args.json and not isinstance(payload, str) else str(payload)
    return code, text


def main(argv=None) -> int:
    code, text = run(argv)
    if text:
        stream = sys.stderr if text.startswith("error:") else sys.stdout
        print(text, file=stream)
    return code


if __name__ == "__main__":
    sys.exit(main())
