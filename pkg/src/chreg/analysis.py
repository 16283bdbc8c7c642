"""
Post-processing of completed trajectories: uniform-in-eps energy monitors,
the two sides of the Cauchy inequality between two regularization levels,
errors against a reference run, power-law fits and truncation studies.

Time integrals are sums ``dt * sum_{n=1}^{M} F(u^n)`` over the implicit
(right end) values produced by the stepper; the rate monitor uses the
difference quotient of each step.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class MonitorSet:
    m0: float
    m1: float
    m2: float
    m3: float

    @property
    def observed(self):
        """Largest of the four monitors: the empirical a priori constant."""
        return max(self.m0, self.m1, self.m2, self.m3)

    def as_tuple(self):
        return (self.m0, self.m1, self.m2, self.m3)


def energy_monitors(engine, traj, graph, eps=None):
    """Discrete versions of the four a priori bounds along ``traj``.

    m0 = max_n [|u^n|_H^2 + eps sum_{k<=n} dt |A_h u^k|_H^2]
    m1 = sum_n dt |(u^{n+1} - u^n)/dt|_{V*}^2 + max_n eps |u^n|_V^2
    m2 = sum_n dt |mu^n|_V^2
    m3 = sum_n dt |beta(u^n)|_H^2

    where ``A_h = M^{-1} (K + M)`` is the nodal form of ``-Laplace + 1``.
    """
    eps = traj.eps if eps is None else eps
    dt = traj.dt
    u = traj.u
    m = engine.mass
    h2 = np.einsum("ij,j,ij->i", u, m, u)
    au = np.array([engine.op.apply(row) for row in u])
    v2 = np.einsum("ij,ij->i", u, au)
    lap2 = np.einsum("ij,j,ij->i", au, 1.0 / m, au)
    integral = np.concatenate([[0.0], np.cumsum(dt * lap2[1:])])
    m0 = float(np.max(h2 + eps * integral))
    rates = np.diff(u, axis=0) / dt
    m1 = float(dt * np.sum(engine.vstar_norms(rates) ** 2) + np.max(eps * v2)) if traj.steps else 0.0
    mu_v2 = np.array([row @ engine.op.apply(row) for row in traj.mu])
    m2 = float(dt * np.sum(mu_v2))
    b = graph.beta(u[1:])
    m3 = float(dt * np.sum(np.einsum("ij,j,ij->i", b, m, b)))
    return MonitorSet(m0, m1, m2, m3)


def _check_compatible(a, b):
    if a.u.shape != b.u.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise ValueError("trajectories do not share the same space and time grids")
    if a.grid is not None and b.grid is not None and a.grid != b.grid:
        raise ValueError("trajectories live on different grids")


def cauchy_gap_lhs(engine, traj_eps, traj_gamma, graph):
    """``max_n |u_eps - u_gamma|_{V*}^2 + 2 dt sum_n (beta(u_eps) - beta(u_gamma), u_eps - u_gamma)_H``."""
    _check_compatible(traj_eps, traj_gamma)
    diff = traj_eps.u - traj_gamma.u
    sup = float(np.max(engine.vstar_norms(diff) ** 2))
    db = graph.beta(traj_eps.u[1:]) - graph.beta(traj_gamma.u[1:])
    pairing = np.einsum("ij,j,ij->i", db, engine.mass, diff[1:])
    return sup + 2.0 * traj_eps.dt * float(np.sum(pairing))


def cauchy_bound_rhs(eps, gamma, M, T, c1=0.5, sigma=lambda s: s, d0=0.0):
    """Right side of the Cauchy inequality.

    ``d0**2 + 2M(eps^.5 + gamma^.5) + 2MT(eps^.5 + gamma^.5 + 2 c1 (sigma(eps) + sigma(gamma)))``
    """
    for name, value in (("eps", eps), ("gamma", gamma), ("M", M), ("T", T), ("c1", c1), ("d0", d0)):
        if value < 0:
            raise ValueError(f"{name} must be nonnegative, got {value}")
    roots = np.sqrt(eps) + np.sqrt(gamma)
    return float(d0 * d0 + 2 * M * roots + 2 * M * T * (roots + 2 * c1 * (sigma(eps) + sigma(gamma))))


def error_vs_reference(engine, traj, traj_ref):
    """``max_n |u^n - u_ref^n|_{V*}``."""
    _check_compatible(traj, traj_ref)
    return float(np.max(engine.vstar_norms(traj.u - traj_ref.u)))


def rate_fit(points):
    """Least-squares fit of ``value = C * eps**p`` in log-log coordinates.

    Returns ``(C, p)``.
    """
    pts = [(float(e), float(v)) for e, v in points]
    if len(pts) < 2:
        raise ValueError("need at least two points")
    if any(e <= 0 or v <= 0 for e, v in pts):
        raise ValueError("rate fit needs positive eps and values")
    x = np.log([e for e, _ in pts])
    y = np.log([v for _, v in pts])
    if np.ptp(x) == 0:
        raise ValueError("rate fit needs at least two distinct eps")
    p, logc = np.polyfit(x, y, 1)
    return float(np.exp(logc)), float(p)


@dataclass(frozen=True)
class TruncationRow:
    r_small: float
    r_large: float
    sup_diff: float


def nested_node_counts(radii, a, h):
    """Node counts of the grids ``[a, R]`` with spacing ``h``; rejects non-nested radii."""
    if any(r2 <= r1 for r1, r2 in zip(radii, radii[1:])):
        raise ValueError("radii must be strictly increasing")
    counts = []
    for r in radii:
        k = (r - a) / h
        if k < 1 or abs(k - round(k)) > 1e-9 * max(1.0, k):
            raise ValueError(f"radius {r} is not on the node lattice a + k*h (a={a}, h={h}); grids not nested")
        counts.append(round(k) + 1)
    return counts


def truncation_study(run, radii, a, h):
    """Compare final states of one problem truncated at increasing outer radii.

    Parameters
    ----------
    run : callable
        ``run(R)`` solves the problem on ``[a, R]`` with spacing ``h`` and
        returns the final nodal field.
    radii : sequence of float
        Strictly increasing outer radii; each must be ``a + k h``.
    a, h : float
        Inner end and node spacing shared by all grids (makes them nested).

    Returns
    -------
    list of TruncationRow
        ``max |u_R(T) - u_R'(T)|`` over the nodes of the smaller domain, for
        each consecutive pair ``(R, R')``.
    """
    radii = [float(r) for r in radii]
    counts = nested_node_counts(radii, a, h)
    if len(radii) < 2:
        return []
    finals = [np.asarray(run(r)) for r in radii]
    rows = []
    for i in range(len(radii) - 1):
        n = counts[i]
        diff = float(np.max(np.abs(finals[i] - finals[i + 1][:n])))
        rows.append(TruncationRow(radii[i], radii[i + 1], diff))
    return rows
