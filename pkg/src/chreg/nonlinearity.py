"""
Catalog of single-valued maximal monotone graphs and the anti-monotone
perturbation used by the Cahn-Hilliard regularization.

Every graph is vectorized over numpy arrays and provides

* ``beta(r)``           the monotone function itself
* ``potential(r)``      its convex primitive with ``potential(0) == 0``
* ``derivative(r)``     a selection from the generalized derivative
* ``resolvent(lam, x)`` the unique ``r`` with ``r + lam * beta(r) == x``
* ``yosida(lam, x)``    ``(x - resolvent(lam, x)) / lam``
"""
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

DERIVATIVE_CAP = 1e8


class MonotoneGraph:
    """Base class; subclasses implement ``beta``, ``potential``, ``derivative``
    and optionally a closed-form ``resolvent``."""

    kind = "abstract"

    def beta(self, r):
        raise NotImplementedError

    def potential(self, r):
        raise NotImplementedError

    def derivative(self, r, cap=DERIVATIVE_CAP):
        raise NotImplementedError

    def kinks(self):
        """Points where ``beta`` is not differentiable."""
        return ()

    def resolvent(self, lam, x):
        return _monotone_root(self.beta, self.derivative, lam, x)

    def yosida(self, lam, x):
        lam = _positive_lambda(lam)
        x = np.asarray(x, dtype=float)
        return (x - self.resolvent(lam, x)) / lam

    def yosida_derivative(self, lam, x, cap=DERIVATIVE_CAP):
        """Derivative of the Yosida approximation, bounded by ``1 / lam``."""
        lam = _positive_lambda(lam)
        d = self.derivative(self.resolvent(lam, x), cap=cap)
        return d / (1.0 + lam * d)

    def params(self):
        return {}


@dataclass(frozen=True)
class Linear(MonotoneGraph):
    kind = "linear"

    def beta(self, r):
        return np.asarray(r, dtype=float) * 1.0

    def potential(self, r):
        r = np.asarray(r, dtype=float)
        return 0.5 * r * r

    def derivative(self, r, cap=DERIVATIVE_CAP):
        return np.ones_like(np.asarray(r, dtype=float))

    def resolvent(self, lam, x):
        lam = _positive_lambda(lam)
        return np.asarray(x, dtype=float) / (1.0 + lam)


@dataclass(frozen=True)
class PowerLaw(MonotoneGraph):
    """``beta(r) = |r|**(q-1) * r``: porous media for q > 1, fast diffusion for q < 1."""

    q: float = 2.0
    kind = "power"

    def __post_init__(self):
        if not (np.isfinite(self.q) and self.q > 0):
            raise ConfigError("model.beta.q", f"need q > 0, got {self.q!r}")

    def beta(self, r):
        r = np.asarray(r, dtype=float)
        return np.sign(r) * np.abs(r) ** self.q

    def potential(self, r):
        r = np.asarray(r, dtype=float)
        return np.abs(r) ** (self.q + 1.0) / (self.q + 1.0)

    def derivative(self, r, cap=DERIVATIVE_CAP):
        a = np.abs(np.asarray(r, dtype=float))
        if self.q == 1.0:
            return np.ones_like(a)
        with np.errstate(divide="ignore"):
            d = self.q * a ** (self.q - 1.0)
        return np.minimum(d, cap)

    def kinks(self):
        return (0.0,) if self.q < 1.0 else ()

    def params(self):
        return {"q": self.q}


@dataclass(frozen=True)
class Stefan(MonotoneGraph):
    """Enthalpy-temperature graph with latent-heat plateau ``[0, latent]``."""

    ks: float = 1.0
    kl: float = 1.0
    latent: float = 1.0
    kind = "stefan"

    def __post_init__(self):
        for key, value in (("ks", self.ks), ("kl", self.kl), ("latent", self.latent)):
            if not (np.isfinite(value) and value > 0):
                raise ConfigError(f"model.beta.{key}", f"must be > 0, got {value!r}")

    def beta(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(r < 0, self.ks * r, np.where(r > self.latent, self.kl * (r - self.latent), 0.0))

    def potential(self, r):
        r = np.asarray(r, dtype=float)
        return np.where(
            r < 0,
            0.5 * self.ks * r * r,
            np.where(r > self.latent, 0.5 * self.kl * (r - self.latent) ** 2, 0.0),
        )

    def derivative(self, r, cap=DERIVATIVE_CAP):
        # left-limit selection at the kinks 0 and latent
        r = np.asarray(r, dtype=float)
        return np.where(r <= 0, self.ks, np.where(r > self.latent, self.kl, 0.0))

    def kinks(self):
        return (0.0, self.latent)

    def resolvent(self, lam, x):
        lam = _positive_lambda(lam)
        x = np.asarray(x, dtype=float)
        return np.where(
            x < 0,
            x / (1.0 + lam * self.ks),
            np.where(x > self.latent, (x + lam * self.kl * self.latent) / (1.0 + lam * self.kl), x),
        )

    def params(self):
        return {"ks": self.ks, "kl": self.kl, "latent": self.latent}


def make_graph(kind, **params):
    """Build a catalog member from its kind name and parameters."""
    if kind == "linear":
        return Linear()
    if kind == "power":
        return PowerLaw(q=float(params.get("q", 2.0)))
    if kind == "stefan":
        return Stefan(
            ks=float(params.get("ks", 1.0)),
            kl=float(params.get("kl", 1.0)),
            latent=float(params.get("latent", 1.0)),
        )
    raise ConfigError("model.beta.kind", f"unknown graph {kind!r}")


def beta_eval(graph, r):
    return graph.beta(r)


def beta_potential(graph, r):
    return graph.potential(r)


def beta_derivative(graph, r, cap=DERIVATIVE_CAP):
    return graph.derivative(r, cap=cap)


def resolvent_scalar(graph, lam, x):
    return graph.resolvent(lam, x)


def yosida_eval(graph, lam, x):
    return graph.yosida(lam, x)


def _positive_lambda(lam):
    lam = float(lam)
    if not lam > 0:
        raise ValueError(f"resolvent parameter must be > 0, got {lam}")
    return lam


def _monotone_root(beta, derivative, lam, x, max_iter=200):
    """Safeguarded Newton/bisection for ``r + lam * beta(r) = x``.

    Since ``beta(0) = 0`` and ``r + lam * beta(r)`` is increasing, the root
    lies between 0 and ``x``.
    """
    lam = _positive_lambda(lam)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    lo = np.minimum(x, 0.0)
    hi = np.maximum(x, 0.0)
    tol = 1e-12 * (1.0 + np.abs(x))
    r = x / (1.0 + lam * np.maximum(derivative(x), 0.0))
    r = np.clip(r, lo, hi)
    for _ in range(max_iter):
        res = r + lam * beta(r) - x
        done = np.abs(res) <= tol
        if done.all():
            break
        lo = np.where(res < 0, r, lo)
        hi = np.where(res > 0, r, hi)
        slope = 1.0 + lam * derivative(r)
        trial = r - res / slope
        bad = ~((trial > lo) & (trial < hi))
        trial = np.where(bad, 0.5 * (lo + hi), trial)
        r = np.where(done, r, trial)
    else:
        res = r + lam * beta(r) - x
        if np.any(np.abs(res) > tol):
            raise ArithmeticError("resolvent iteration did not converge")
    return r[0] if scalar else r


@dataclass(frozen=True)
class Perturbation:
    """``pi_eps(r) = -(eps/2) r`` with modulus ``sigma(eps) = eps`` and constant ``c1``.

    ``c1`` must lie in ``[1/2, 1)`` so that the Lipschitz constant ``eps/2``
    is dominated by ``c1 * sigma(eps)`` and ``c1 * sigma(eps) < eps``.
    """

    eps: float
    c1: float = 0.5

    def __post_init__(self):
        if not (np.isfinite(self.eps) and 0 < self.eps <= 1):
            raise ConfigError("model.epsilon", f"must lie in (0, 1], got {self.eps!r}")
        if not (0.5 <= self.c1 < 1.0):
            raise ConfigError("model.c1", f"must lie in [0.5, 1), got {self.c1!r}")

    def value(self, r):
        return -0.5 * self.eps * np.asarray(r, dtype=float)

    def primitive(self, r):
        r = np.asarray(r, dtype=float)
        return -0.25 * self.eps * r * r

    def derivative(self):
        return -0.5 * self.eps

    @property
    def lipschitz(self):
        return 0.5 * self.eps

    @staticmethod
    def sigma(eps):
        return float(eps)

    @property
    def certificate(self):
        """``c1 * sigma(eps)``, the bound on ``|pi_eps'|``."""
        return self.c1 * self.sigma(self.eps)


def perturbation_eval(p, r):
    return p.value(r)


def perturbation_primitive(p, r):
    return p.primitive(r)


@dataclass
class ConditionReport:
    checks: dict

    @property
    def passed(self):
        return all(self.checks.values())

    def failures(self):
        return [name for name, ok in self.checks.items() if not ok]

    def lines(self):
        return [f"{name}: {'PASS' if ok else 'FAIL'}" for name, ok in self.checks.items()]


def validate_conditions(graph, p, samples=2001, bound=10.0, tol=1e-8, seed=0):
    """Sampled certificate for the structural hypotheses on ``graph`` and ``p``.

    Uses a fixed sample set (uniform grid plus seeded random points in
    ``[-bound, bound]``), so the report is deterministic.
    """
    rng = np.random.default_rng(seed)
    r = np.sort(np.concatenate([np.linspace(-bound, bound, samples), rng.uniform(-bound, bound, samples)]))
    b = graph.beta(r)
    pot = graph.potential(r)
    checks = {}
    checks["beta(0)=0"] = abs(float(graph.beta(0.0))) <= tol
    checks["potential(0)=0"] = abs(float(graph.potential(0.0))) <= tol
    checks["potential>=0"] = bool(np.all(pot >= -tol))
    checks["beta monotone"] = bool(np.all(np.diff(b) >= -tol))
    mid = 0.5 * (r[:-2] + r[2:])
    checks["potential convex"] = bool(
        np.all(graph.potential(mid) <= 0.5 * (pot[:-2] + pot[2:]) + tol * (1 + np.abs(pot[1:-1])))
    )
    step = 1e-5
    away = np.ones_like(r, dtype=bool)
    for k in graph.kinks():
        away &= np.abs(r - k) > 1e-2
    fd = (graph.potential(r + step) - graph.potential(r - step)) / (2 * step)
    checks["potential'=beta"] = bool(np.all(np.abs(fd - b)[away] <= 1e-6 * (1 + np.abs(b[away]))))
    pv = p.value(r)
    checks["pi(0)=0"] = abs(float(p.value(0.0))) <= tol
    checks["pi lipschitz <= c1*sigma < eps"] = bool(
        p.lipschitz <= p.certificate + tol
        and p.certificate < p.eps
        and np.all(np.abs(np.diff(pv)) <= p.certificate * np.diff(r) + tol)
    )
    conv = 0.5 * p.eps * r * r + p.primitive(r)
    checks["eps/2 r^2 + pi_hat convex"] = bool(
        np.all(0.5 * p.eps * mid * mid + p.primitive(mid) <= 0.5 * (conv[:-2] + conv[2:]) + tol)
    )
    return ConditionReport(checks)
