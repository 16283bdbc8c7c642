"""Cahn-Hilliard regularization of nonlinear diffusion equations on truncated unbounded domains."""
from .analysis import (
    MonitorSet,
    TruncationRow,
    cauchy_bound_rhs,
    cauchy_gap_lhs,
    energy_monitors,
    error_vs_reference,
    rate_fit,
    truncation_study,
)
from .dual import DualEngine
from .errors import ConfigError, ConsistencyError, StepError
from .evolution import (
    InitialData,
    SolverConfig,
    Trajectory,
    phi_eps_energy,
    prepare_initial_data,
    solve_trajectory,
    step_cahn_hilliard,
    step_direct,
)
from .grid import EllipticOperator, Grid, apply_A, assemble_operator, build_grid
from .nonlinearity import (
    Linear,
    MonotoneGraph,
    Perturbation,
    PowerLaw,
    Stefan,
    make_graph,
    validate_conditions,
)

__version__ = "0.1.0"
