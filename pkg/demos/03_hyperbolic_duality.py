"""Critical points of the {3,7} and {7,3} tilings estimated on finite patches.

A patch of a {p,q} tiling and the dual of a {q,p} patch are finite pieces of the
same infinite lattice, so their p_c estimates should agree.  Sphere growth
E|dB_int(R)| is flat in R exactly at criticality; the estimator locates the p
where its log-slope crosses zero.
"""

import numpy as np

from percolab.estimators import pc_from_spheres, pc_spanning
from percolab.graphgen import build_tiling, dual

sq = pc_spanning(sizes=(16, 32), samples=2000, seed=4)
print(f"square lattice calibration: p_c = {sq.value:.4f} +- {sq.err:.4f}")

m37 = build_tiling(3, 7, 7)
d73 = dual(build_tiling(7, 3, 7))
print(f"{{3,7}} patch: {m37.graph.vertex_count} vertices, Euler characteristic {m37.euler_characteristic()}")
grid = np.linspace(0.19, 0.21, 5)
a = pc_from_spheres(m37.graph, grid, samples=20_000, seed=1)
b = pc_from_spheres(d73.graph, grid, samples=20_000, seed=1)
print(f"p_c({{3,7}})        = {a.value:.4f} +- {a.err:.4f}")
print(f"p_c(dual of {{7,3}}) = {b.value:.4f} +- {b.err:.4f}")
print(f"so p_u({{7,3}}) = 1 - p_c({{3,7}}) is about {1 - a.value:.3f}")
