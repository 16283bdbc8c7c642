"""
Finite elements and the dual norm
=================================

Assemble the weighted P1 operator on an exterior radial domain and compare
the three norms of a field. The V* norm comes from one Riesz solve.
"""

import numpy as np

from chreg import DualEngine, assemble_operator, build_grid

# annulus 1 <= r <= 8 in the plane, seen through the radial weight r
grid = build_grid("radial_exterior", 1.0, 8.0, 141, 2)
op = assemble_operator(grid)
engine = DualEngine(op)
print(grid)
print("measure of the truncated domain:", op.measure)

# a bump and its norms; the chain vstar <= h <= v always holds
r = grid.nodes
bump = np.exp(-((r - 2.0) ** 2) / 0.5)
print("V* norm:", engine.vstar_norm(bump))
print("H  norm:", engine.h_norm(bump))
print("V  norm:", engine.v_norm(bump))

# oscillation is cheap in V* and expensive in V
wiggle = bump * np.cos(20 * r)
print("wiggle V*/H:", engine.vstar_norm(wiggle) / engine.h_norm(wiggle))
print("wiggle V/H :", engine.v_norm(wiggle) / engine.h_norm(wiggle))

# the source f solves (-Laplace + 1) f = g; applying the operator gives g back
g = np.sin(r)
f = engine.compute_f(g)
print("round trip error:", np.max(np.abs(engine.discrete_operator(f) - g)))
