"""
Truncating the exterior domain
==============================

Solve the same problem on annuli of growing outer radius and watch the
influence of the artificial boundary fade on the part they share.
"""

import numpy as np

from chreg import (
    DualEngine,
    SolverConfig,
    Stefan,
    assemble_operator,
    build_grid,
    solve_trajectory,
    truncation_study,
)
from chreg.analysis import nested_node_counts

a, h = 1.0, 0.05
radii = [4.0, 8.0, 16.0, 32.0]
counts = dict(zip(radii, nested_node_counts(radii, a, h)))
graph = Stefan(2.0, 3.0, 1.0)


# liquid background with a hot bump at r = 2
def run(R):
    engine = DualEngine(assemble_operator(build_grid("radial_exterior", a, R, counts[R], 2)))
    r = engine.op.grid.nodes
    u0 = 1.5 + np.exp(-((r - 2.0) ** 2) / 0.5)
    return solve_trajectory(engine, graph, SolverConfig(dt=1e-3, horizon=1.0), u0, mode="direct").final


for row in truncation_study(run, radii, a, h):
    print(f"R={row.r_small:>4} vs {row.r_large:>4}: sup diff {row.sup_diff:.3e}")
