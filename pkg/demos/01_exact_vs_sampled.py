"""Exact connection probabilities next to Monte Carlo estimates on a small graph.

The Petersen graph has 15 edges, so every one of the 2^15 configurations can be
enumerated.  The sampled two-point matrix should sit within a few standard
errors of the exact polynomial at every pair.
"""

from fractions import Fraction

import numpy as np

from percolab.oracle import EventSpec, corpus, exact_event_prob, exact_matrices, verify_bk
from percolab.operators import build_matrix

g = dict(corpus())["petersen"]
print(f"petersen: {g.vertex_count} vertices, {g.edge_count} edges")

r = exact_event_prob(g, EventSpec.connection(0, 7), Fraction(1, 2))
print(f"P(0 <-> 7) at p = 1/2 is exactly {r.value} = {float(r.value):.6f}")

exact = exact_matrices(g).values("T", Fraction(1, 2))
mc = build_matrix(g, 0.5, "T", source="mc", samples=50_000, seed=3).values
se = np.sqrt(exact * (1 - exact) / 50_000)
z = np.abs(mc - exact)[se > 0] / se[se > 0]
print(f"sampled vs exact two-point function: worst |z| = {z.max():.2f} over {z.size} pairs")

bk = verify_bk(g)
print(f"BK inequality checked on {bk.checks} event pairs, smallest exact slack {bk.min_slack}")
