"""Regenerate the files in fixtures/ from the generators.

    python demos/make_fixtures.py OUTDIR
"""
import json
import sys
from pathlib import Path

from basisnum.decomposition import PathDecomposition, TreeDecomposition, td_to_json
from basisnum.generators import clique, complete_bipartite, cycle, ladder, path, petersen
from basisnum.graph import Graph, encode_graph6
from basisnum.thin import grow_prefix, network_to_dict, witness_to_dict


def dump(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def main(out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    graphs = {
        "k4": clique(4),
        "k5": clique(5),
        "k33": complete_bipartite(3, 3),
        "petersen": petersen(),
        "c5": cycle(5),
        "c8": cycle(8),
        "ladder6": ladder(6),
        "path7": path(7),
        # C4 0-2-1-3 seen as two triangles over the non-edge 01
        "diamond": Graph(4, [(0, 2), (1, 2), (0, 3), (1, 3)]),
        # path 0-2-3-4-1 that only closes deep in its decomposition
        "descent": Graph(5, [(0, 2), (2, 3), (3, 4), (1, 4)]),
    }
    for name, g in graphs.items():
        (out / f"{name}.g6").write_text(encode_graph6(g) + "\n")

    diamond_td = TreeDecomposition({0: None, 1: 0}, {0: {0, 1, 2}, 1: {0, 1, 3}})
    (out / "diamond_td.json").write_text(td_to_json(diamond_td))
    (out / "diamond_paths.json").write_text(dump({"entries": [{"node": 1, "pair": [0, 1], "path": [0, 2, 1]}]}))

    bags = []
    for i in range(5):
        bags += [[i, i + 1, 6 + i], [i + 1, 6 + i, 7 + i]]
    (out / "ladder6_pd.json").write_text(dump({"bags": bags}))

    dbags = [{0, 1}, {0, 1, 2}, {1, 2, 3}, {1, 3, 4}]
    td = PathDecomposition(dbags)
    (out / "descent_td.json").write_text(td_to_json(td))
    (out / "descent_bags.json").write_text(dump([sorted(b) for b in dbags]))
    r = grow_prefix(graphs["descent"], td, 0, 1)
    (out / "descent_network.json").write_text(dump(network_to_dict(r.network)))
    (out / "descent_witness.json").write_text(dump(witness_to_dict(r.witness)))


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    main(Path(sys.argv[1]))
