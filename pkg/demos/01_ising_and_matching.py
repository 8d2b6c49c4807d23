"""
MaxCut as an Ising problem, and graph matchings
================================================

A cut of a graph is scored by an Ising energy: with z = 1 - 2b, every edge
contributes w/2 * z_i z_j, so cut(b) = W/2 - E(b).
"""
import numpy as np

from mqaoa import Graph, brute_force_ground, cut_value, energy_of, make_cycle, make_random_regular, maxcut_to_ising
from mqaoa import maximal_matching, partition_from_matching

# the 4-ring: alternating bits cut every edge
ring = make_cycle(4)
H = maxcut_to_ising(ring)
print("couplings:", H.couplings)
for bits in ([0, 1, 0, 1], [0, 0, 0, 0], [0, 0, 1, 1]):
    print(bits, "energy", energy_of(H, bits), "cut", cut_value(ring, bits))

# exhaustive search returns every minimizer, sorted
e, minimizers = brute_force_ground(H)
print("ground energy", e, "minimizers", ["".join(map(str, m)) for m in minimizers])

# a triangle is frustrated: six assignments tie at cut 2
tri = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
e, minimizers = brute_force_ground(maxcut_to_ising(tri))
print("triangle minimizers:", len(minimizers), "first", "".join(map(str, minimizers[0])))

# seeded maximal matchings pair up vertices; each seed shuffles the labels
g = make_random_regular(12, 3, seed=5)
for seed in range(3):
    m = maximal_matching(g, seed)
    part = partition_from_matching(g.n, m)
    print(f"seed {seed}: {len(m)} pairs {sorted(m.edges)}, unmatched {part.unmatched}, coarse size {part.n_coarse}")

# every edge has at least one matched endpoint
covered = {v for e in m.edges for v in e}
print("maximal:", all(i in covered or j in covered for i, j in g.edges))
print("mean degree", g.mean_degree(), "degrees", np.unique(g.degrees()))
