"""A short walk through the library on small graphs.

    python demos/tour.py
"""
import random

from basisnum.captured import captured_adhesion_basis, default_path_family
from basisnum.combinators import add_vertex
from basisnum.cyclespace import cycle_space_dimension, edge_vector, girth_lower_bound
from basisnum.decomposition import PathDecomposition, TreeDecomposition
from basisnum.generators import clique, complete_bipartite, cycle, ladder, petersen, random_letter
from basisnum.graph import Graph
from basisnum.oracle import exact_basis_number
from basisnum.pipeline import bn_path_decomposition, derivation_nodes
from basisnum.semigroup import abstraction, factorise, reachable_subsemigroup
from basisnum.thin import grow_prefix


def section(title):
    print(f"\n== {title}")


section("exact basis numbers")
for name, g in [("K4", clique(4)), ("K5", clique(5)), ("K3,3", complete_bipartite(3, 3)), ("C6", cycle(6)), ("Petersen", petersen())]:
    r = exact_basis_number(g)
    print(f"{name:9} bn = {r.bn}  girth bound = {girth_lower_bound(g)}  search nodes = {r.explored_nodes}")

section("adding a hub to a 5-cycle")
w = Graph(6, [(i, (i + 1) % 5) for i in range(5)] + [(i, 5) for i in range(5)])
rim = edge_vector(w.edge_id(i, (i + 1) % 5) for i in range(5))
cert = add_vertex(w, 5, [rim])
print(f"{len(cert.family)} cycles, dim {cycle_space_dimension(w)}, congestion {cert.measured_congestion} <= {cert.claimed_congestion}")

section("captured adhesions: two triangles over a non-edge")
g = Graph(4, [(0, 2), (1, 2), (0, 3), (1, 3)])
td = TreeDecomposition({0: None, 1: 0}, {0: {0, 1, 2}, 1: {0, 1, 3}})
bases = {t: exact_basis_number(td.torso(g, t)[0]).witness.family.members for t in td.preorder}
cert = captured_adhesion_basis(g, td, bases, default_path_family(g, td))
print(f"kinds {cert.details['kinds']}, b = {cert.details['b']}, c = {cert.details['c']}, "
      f"measured {cert.measured_congestion} <= claimed {cert.claimed_congestion}")

section("path-decomposition pipeline on the 6-rung ladder")
g = ladder(6)
bags = []
for i in range(5):
    bags += [{i, i + 1, 6 + i}, {i + 1, 6 + i, 7 + i}]
cert = bn_path_decomposition(g, PathDecomposition(bags), 2)
nodes = list(derivation_nodes(cert.details["derivation"]))
print(f"rank {cert.rank}/{cycle_space_dimension(g)}, measured {cert.measured_congestion} <= claimed {cert.claimed_congestion}, "
      f"tree height {cert.details['height']}, {len(nodes)} certified nodes, optimum {exact_basis_number(g).bn}")

section("factorisation forest of a random word")
rng = random.Random(0)
alphabet = [random_letter(2, rng) for _ in range(3)]
values = [abstraction(rng.choice(alphabet)) for _ in range(150)]
t = factorise(values)
print(f"length {len(values)}, height {t.height}, reachable elements {len(reachable_subsemigroup(values))}")

section("growing a prefix until two paths avoid shared adhesions")
g = Graph(5, [(0, 2), (2, 3), (3, 4), (1, 4)])
td = PathDecomposition([{0, 1}, {0, 1, 2}, {1, 2, 3}, {1, 3, 4}])
r = grow_prefix(g, td, 0, 1)
for step in r.trace:
    print(f"prefix {step['prefix']}: thin={step['thin']}, {step['cutedges']} cutedges")
print(f"P1 {list(r.p1.vertices)}  P2 {list(r.p2.vertices)}")
