"""
Cauchy criterion and convergence rate in eps
============================================

Run a ladder of regularization levels, check the Cauchy inequality for every
pair and fit the rate of the error against a much smaller eps.
"""

import numpy as np

from chreg import (
    DualEngine,
    Perturbation,
    SolverConfig,
    Stefan,
    assemble_operator,
    build_grid,
    cauchy_bound_rhs,
    cauchy_gap_lhs,
    energy_monitors,
    error_vs_reference,
    prepare_initial_data,
    rate_fit,
    solve_trajectory,
)

engine = DualEngine(assemble_operator(build_grid("radial_exterior", 1.0, 8.0, 141, 2)))
r = engine.op.grid.nodes
graph = Stefan(2.0, 3.0, 1.0)
u0 = 3.0 * np.exp(-((r - 2.0) ** 2) / 0.5)
ladder = [0.2, 0.1, 0.05, 0.025]


def run(eps):
    init = prepare_initial_data(engine, u0, eps)
    cfg = SolverConfig(dt=1e-3, horizon=1.0, eps=eps)
    return init, solve_trajectory(engine, graph, cfg, init, perturbation=Perturbation(eps))


runs = {eps: run(eps) for eps in ladder}

# the a priori monitors stay of the same size along the ladder
M = max(energy_monitors(engine, traj, graph).observed for _, traj in runs.values())
print("M_observed:", M)

for i, eps in enumerate(ladder):
    for gamma in ladder[i + 1:]:
        (ie, te), (ig, tg) = runs[eps], runs[gamma]
        d0 = engine.vstar_norm(ie.regularized - ig.regularized)
        lhs = cauchy_gap_lhs(engine, te, tg, graph)
        rhs = cauchy_bound_rhs(eps, gamma, M, 1.0, d0=d0)
        print(f"eps={eps:<6} gamma={gamma:<6} lhs={lhs:.4f} rhs={rhs:.4f}")

# error against eps_min / 16 and the fitted power of e^2
_, ref = run(ladder[-1] / 16)
errors = [error_vs_reference(engine, runs[eps][1], ref) for eps in ladder]
for eps, e in zip(ladder, errors):
    print(f"eps={eps:<6} e={e:.4f} e^2/sqrt(eps)={e * e / np.sqrt(eps):.4f}")
C, p = rate_fit(list(zip(ladder, np.square(errors))))
print(f"e^2 ~ {C:.3f} eps^{p:.3f}")
