"""
Backward Euler time stepping for the regularized (Cahn-Hilliard) system and
the limit nonlinear diffusion problem.

Cahn-Hilliard step, unknowns ``u = u^{n+1}`` and ``mu = mu^{n+1}``::

    M (u - u^n) / dt + (K + M) mu = 0
    mu = eps M^{-1} (K + M) u + beta(u) + pi_eps(u) - f^n

Direct step::

    M (u - u^n) / dt + (K + M) beta(u) = M g^n        (mu = beta(u) - f^n)

``mu`` is eliminated and the resulting equation in ``u`` is solved by a
semismooth Newton iteration with step halving. The residual
``r = M (u - u^n) + dt (K + M) mu`` is a functional on V (the weak identity
tested against every basis function); it is measured in the dual norm

    |r|_* = (r^T (K + M)^{-1} r)^{1/2}

which also bounds the V* error of ``u``. The iteration stops once
``|r|_* <= newton_tol * (1 + |u^n|_H)``.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded, solve_banded

from .errors import ConfigError, ConsistencyError, StepError
from .nonlinearity import Perturbation

MODES = ("cahn_hilliard", "direct")

# Jacobian smoothing parameters tried, in order, when a Newton step stalls.
_FALLBACK_LAMBDAS = (1e-8, 1e-6, 1e-4, 1e-2)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    horizon: float
    eps: float = None
    newton_tol: float = 1e-10
    newton_max_iters: int = 50
    yosida_lambda: float = 0.0
    derivative_cap: float = 1e8
    max_halvings: int = 30

    def __post_init__(self):
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ConfigError("time.dt", f"must be > 0, got {self.dt!r}")
        if not (np.isfinite(self.horizon) and self.horizon > 0):
            raise ConfigError("time.horizon", f"must be > 0, got {self.horizon!r}")
        steps = round(self.horizon / self.dt)
        if steps < 1 or abs(steps * self.dt - self.horizon) > 1e-12 * max(1.0, self.horizon):
            raise ConfigError("time.dt", f"horizon {self.horizon} is not an integer multiple of dt {self.dt}")
        if self.eps is not None and not (0 < self.eps <= 1):
            raise ConfigError("model.epsilon", f"must lie in (0, 1], got {self.eps!r}")
        if not self.newton_tol > 0:
            raise ConfigError("solver.newton_tol", f"must be > 0, got {self.newton_tol!r}")
        if int(self.newton_max_iters) != self.newton_max_iters or self.newton_max_iters < 1:
            raise ConfigError("solver.newton_max_iters", f"need an integer >= 1, got {self.newton_max_iters!r}")
        if not self.yosida_lambda >= 0:
            raise ConfigError("solver.yosida_lambda", f"must be >= 0, got {self.yosida_lambda!r}")
        if not self.derivative_cap > 0:
            raise ConfigError("solver.derivative_cap", f"must be > 0, got {self.derivative_cap!r}")

    @property
    def steps(self):
        return round(self.horizon / self.dt)

    def times(self):
        return self.dt * np.arange(self.steps + 1)

    def with_eps(self, eps):
        return SolverConfig(
            dt=self.dt,
            horizon=self.horizon,
            eps=eps,
            newton_tol=self.newton_tol,
            newton_max_iters=self.newton_max_iters,
            yosida_lambda=self.yosida_lambda,
            derivative_cap=self.derivative_cap,
            max_halvings=self.max_halvings,
        )


@dataclass
class InitialData:
    raw: np.ndarray
    regularized: np.ndarray
    eps: float = None
    h_norm_raw: float = 0.0
    h_norm_regularized: float = 0.0
    vstar_shift: float = 0.0

    @property
    def shift_bound(self):
        """``eps**0.5 * |u0|_H``, the admissible V* distance to the raw data."""
        return 0.0 if self.eps is None else np.sqrt(self.eps) * self.h_norm_raw

    @property
    def invariants_hold(self):
        return (
            self.h_norm_regularized <= self.h_norm_raw * (1 + 1e-10) + 1e-300
            and self.vstar_shift <= self.shift_bound * (1 + 1e-10) + 1e-300
        )

    @classmethod
    def unregularized(cls, engine, u0):
        u0 = np.array(u0, dtype=float)
        hn = engine.h_norm(u0)
        return cls(raw=u0, regularized=u0.copy(), h_norm_raw=hn, h_norm_regularized=hn)


def prepare_initial_data(engine, u0, eps):
    """Regularize ``u0`` by the resolvent of ``-Laplace + 1``.

    Solves ``(M + eps (K + M)) u0_eps = M u0``, the discrete counterpart of
    ``u0_eps + eps (-Laplace + 1) u0_eps = u0`` with Neumann conditions.
    """
    if not (np.isfinite(eps) and 0 < eps <= 1):
        raise ConfigError("model.epsilon", f"must lie in (0, 1], got {eps!r}")
    op = engine.op
    u0 = np.array(u0, dtype=float)
    if u0.shape != (op.n,) or not np.all(np.isfinite(u0)):
        raise ValueError("initial field must be finite with one value per node")
    ab = np.zeros((2, op.n))
    ab[0, 1:] = eps * op.k_off
    ab[1] = op.mass + eps * op.a_diag
    rhs = op.mass * u0
    u0e = cho_solve_banded((cholesky_banded(ab), False), rhs)
    lhs = op.mass * u0e + eps * op.apply(u0e)
    scale = np.linalg.norm(rhs)
    if np.linalg.norm(lhs - rhs) > 1e-10 * scale + 1e-300:
        raise ConsistencyError("initial-data resolvent solve is inaccurate")
    data = InitialData(
        raw=u0,
        regularized=u0e,
        eps=float(eps),
        h_norm_raw=engine.h_norm(u0),
        h_norm_regularized=engine.h_norm(u0e),
        vstar_shift=engine.vstar_norm(u0e - u0),
    )
    slack = 1e-8 * (1.0 + data.h_norm_raw)
    if data.h_norm_regularized > data.h_norm_raw + slack or data.vstar_shift > data.shift_bound + slack:
        raise ConsistencyError("regularized initial data violate the resolvent bounds; check the assembly")
    return data


@dataclass
class StepResult:
    u: np.ndarray
    mu: np.ndarray
    iterations: int
    residual: float


class _StepSystem:
    """Residual and banded Jacobian for one mode on a fixed (engine, dt, eps)."""

    def __init__(self, engine, graph, cfg, mode, perturbation=None):
        self.engine = engine
        self.graph = graph
        self.cfg = cfg
        self.mode = mode
        self.op = engine.op
        self.m = self.op.mass
        self.dt = cfg.dt
        self.perturbation = perturbation
        self.o = self.op.k_off
        self.a = self.op.a_diag
        n = self.op.n
        if mode == "cahn_hilliard":
            eps = perturbation.eps
            # C0 = M + dt*eps*A M^{-1} A - dt*(eps/2)*A, pentadiagonal
            ab = np.zeros((5, n))
            a, o, minv = self.a, self.o, 1.0 / self.m
            c = self.dt * eps
            d0 = a * a * minv
            d0[:-1] += o * o * minv[1:]
            d0[1:] += o * o * minv[:-1]
            d1 = a[:-1] * o * minv[:-1] + o * a[1:] * minv[1:]
            d2 = o[:-1] * o[1:] * minv[1:-1]
            ab[2] = self.m + c * d0 - 0.5 * c * a
            ab[1, 1:] = c * d1 - 0.5 * c * o
            ab[3, :-1] = c * d1 - 0.5 * c * o
            ab[0, 2:] = c * d2
            ab[4, :-2] = c * d2
            self._base = ab
            self._lu = (2, 2)
        else:
            ab = np.zeros((3, n))
            ab[1] = self.m
            self._base = ab
            self._lu = (1, 1)

    def mu(self, u, f):
        if self.mode == "cahn_hilliard":
            p = self.perturbation
            return p.eps * self.op.apply(u) / self.m + self.graph.beta(u) + p.value(u) - f
        return self.graph.beta(u) - f

    def residual(self, u, u_old, f):
        mu = self.mu(u, f)
        r = self.m * (u - u_old) + self.dt * self.op.apply(mu)
        return r, mu, dual_norm(self.engine, r)

    def solve_jacobian(self, u, rhs, lam):
        cfg = self.cfg
        if lam > 0:
            d = self.graph.yosida_derivative(lam, u, cap=cfg.derivative_cap)
        else:
            d = self.graph.derivative(u, cap=cfg.derivative_cap)
        ab = self._base.copy()
        mid = self._lu[1]
        dt, a, o = self.dt, self.a, self.o
        ab[mid] += dt * a * d
        ab[mid - 1, 1:] += dt * o * d[1:]
        ab[mid + 1, :-1] += dt * o * d[:-1]
        return solve_banded(self._lu, ab, rhs, check_finite=False)


def _newton(system, u_old, f, cfg):
    if not (np.all(np.isfinite(u_old)) and np.all(np.isfinite(f))):
        raise StepError("non-finite previous state or source", float("nan"), [])
    target = cfg.newton_tol * (1.0 + system.engine.h_norm(u_old))
    u = u_old.copy()
    r, mu, res = system.residual(u, u_old, f)
    log = [res]
    if not np.isfinite(res):
        raise StepError("non-finite residual at the initial guess", res, log)
    lam = cfg.yosida_lambda
    fallbacks = [x for x in _FALLBACK_LAMBDAS if x > lam]
    it = 0
    while res > target:
        if it >= cfg.newton_max_iters:
            raise StepError(f"Newton did not converge in {cfg.newton_max_iters} iterations", res, log)
        it += 1
        du = system.solve_jacobian(u, -r, lam)
        if not np.all(np.isfinite(du)):
            raise StepError("non-finite Newton update", res, log)
        t = 1.0
        for _ in range(cfg.max_halvings + 1):
            cand = u + t * du
            rc, muc, resc = system.residual(cand, u_old, f)
            if np.isfinite(resc) and resc < res:
                break
            t *= 0.5
        else:
            if not fallbacks:
                raise StepError("Newton step stalled after step halving", res, log)
            lam = fallbacks.pop(0)
            continue
        u, r, mu, res = cand, rc, muc, resc
        log.append(res)
    return StepResult(u=u, mu=mu, iterations=it, residual=res)


def step_cahn_hilliard(engine, graph, perturbation, cfg, u_old, f_old, _system=None):
    """One implicit Euler step of the regularized system; returns a :class:`StepResult`."""
    system = _system or _StepSystem(engine, graph, cfg, "cahn_hilliard", perturbation)
    return _newton(system, np.asarray(u_old, dtype=float), np.asarray(f_old, dtype=float), cfg)


def step_direct(engine, graph, cfg, u_old, g_old, _system=None):
    """One implicit Euler step of the limit problem with source ``g_old``."""
    system = _system or _StepSystem(engine, graph, cfg, "direct")
    f = engine.compute_f(g_old)
    return _newton(system, np.asarray(u_old, dtype=float), f, cfg)


@dataclass
class Trajectory:
    mode: str
    eps: float
    dt: float
    times: np.ndarray
    u: np.ndarray
    mu: np.ndarray
    f: np.ndarray
    iterations: np.ndarray
    residuals: np.ndarray
    grid: object = field(default=None, repr=False)

    @property
    def steps(self):
        return len(self.times) - 1

    @property
    def horizon(self):
        return float(self.times[-1])

    @property
    def final(self):
        return self.u[-1]


def solve_trajectory(engine, graph, cfg, init, forcing=None, mode="cahn_hilliard", perturbation=None):
    """March from ``t = 0`` to ``cfg.horizon``.

    Parameters
    ----------
    init : InitialData or array_like
        With :class:`InitialData` the regularized field starts a
        Cahn-Hilliard run and the raw field starts a direct run; a plain
        array is used as given in either mode.
    forcing : callable or None
        ``forcing(t)`` returns the nodal source ``g(t)``; sampled at the left
        end of each step. ``None`` means ``g = 0``.
    mode : {"cahn_hilliard", "direct"}
    perturbation : Perturbation, optional
        Defaults to ``Perturbation(cfg.eps)`` in Cahn-Hilliard mode.
    """
    if mode not in MODES:
        raise ConfigError("model.mode", f"expected one of {MODES}, got {mode!r}")
    if mode == "cahn_hilliard":
        if perturbation is None:
            if cfg.eps is None:
                raise ConfigError("model.epsilon", "Cahn-Hilliard mode needs eps")
            perturbation = Perturbation(cfg.eps)
        eps = perturbation.eps
    else:
        perturbation = None
        eps = 0.0
    if isinstance(init, InitialData):
        u0 = init.regularized if mode == "cahn_hilliard" else init.raw
    else:
        u0 = init
    u0 = np.array(u0, dtype=float)
    n = engine.op.n
    if u0.shape != (n,) or not np.all(np.isfinite(u0)):
        raise ValueError("initial field must be finite with one value per node")

    system = _StepSystem(engine, graph, cfg, mode, perturbation)
    steps = cfg.steps
    times = cfg.times()
    u = np.empty((steps + 1, n))
    mu = np.empty((steps, n))
    fs = np.zeros((steps, n))
    iters = np.zeros(steps, dtype=int)
    resid = np.zeros(steps)
    u[0] = u0
    zero = np.zeros(n)
    for k in range(steps):
        if forcing is not None:
            fs[k] = engine.compute_f(np.asarray(forcing(times[k]), dtype=float))
        try:
            res = _newton(system, u[k], fs[k] if forcing is not None else zero, cfg)
        except StepError as exc:
            exc.step = k + 1
            raise
        u[k + 1] = res.u
        mu[k] = res.mu
        iters[k] = res.iterations
        resid[k] = res.residual
    return Trajectory(
        mode=mode, eps=eps, dt=cfg.dt, times=times, u=u, mu=mu, f=fs,
        iterations=iters, residuals=resid, grid=engine.op.grid,
    )


def phi_eps_energy(engine, graph, u, eps, perturbation=None):
    """Convex energy ``eps/2 |u|_V^2 + sum m beta_hat(u) + sum m pi_hat_eps(u)``.

    ``eps = 0`` leaves only the ``beta_hat`` part (the limit functional).
    """
    u = np.asarray(u, dtype=float)
    m = engine.mass
    value = float(m @ graph.potential(u))
    if eps:
        p = perturbation or Perturbation(eps)
        value += 0.5 * eps * engine.v_norm(u) ** 2 + float(m @ p.primitive(u))
    return value


def dual_norm(engine, r):
    """Norm of the functional ``z -> r^T z`` on discrete V."""
    return float(np.sqrt(max(r @ engine.solve_a(r), 0.0)))


def mass_balance_residual(engine, u_new, u_old, mu, dt):
    """Dual norm of ``M (u_new - u_old) + dt (K + M) mu`` for a stored step."""
    r = engine.mass * (u_new - u_old) + dt * engine.op.apply(mu)
    return dual_norm(engine, r)
