"""
Uniform 1D meshes and P1 finite element forms for -Laplace + 1.

Two geometries are supported: a plain interval ``[a, b]`` and the radial
section ``a <= r <= b`` of an exterior domain in R^N, where all integrals
carry the weight ``r**(N-1)``. The area of the unit sphere is left out: it
rescales every norm by the same constant. The outer end ``b`` is an
artificial cut of an unbounded domain; homogeneous Neumann conditions are
natural at both ends.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError

KINDS = ("interval", "radial_exterior")


@dataclass(frozen=True)
class Grid:
    kind: str
    a: float
    b: float
    n: int
    dimension: int = 1

    @property
    def h(self):
        return (self.b - self.a) / (self.n - 1)

    @property
    def nodes(self):
        return np.linspace(self.a, self.b, self.n)

    @property
    def midpoints(self):
        x = self.nodes
        return 0.5 * (x[1:] + x[:-1])

    def element_weights(self):
        """Radial weight ``r**(N-1)`` at element midpoints (ones on an interval)."""
        if self.kind == "interval":
            return np.ones(self.n - 1)
        return self.midpoints ** (self.dimension - 1)


def build_grid(kind="interval", a=0.0, b=1.0, n=2, dimension=1):
    """Validate domain parameters and return a uniform :class:`Grid`."""
    if kind not in KINDS:
        raise ConfigError("domain.kind", f"expected one of {KINDS}, got {kind!r}")
    try:
        n_int = int(n)
    except (TypeError, ValueError):
        raise ConfigError("grid.nodes", f"not an integer: {n!r}") from None
    if n_int != n or n_int < 2:
        raise ConfigError("grid.nodes", f"need an integer >= 2, got {n!r}")
    a, b = float(a), float(b)
    if not (np.isfinite(a) and np.isfinite(b)):
        raise ConfigError("domain.a" if not np.isfinite(a) else "domain.b", "must be finite")
    if not b > a:
        raise ConfigError("domain.b", f"need b > a, got a={a}, b={b}")
    if kind == "radial_exterior":
        if a <= 0:
            raise ConfigError("domain.a", f"radial mode needs a > 0, got {a}")
        if int(dimension) != dimension or dimension < 1:
            raise ConfigError("domain.dimension", f"need an integer >= 1, got {dimension!r}")
        dimension = int(dimension)
    else:
        dimension = 1
    return Grid(kind=kind, a=a, b=b, n=n_int, dimension=dimension)


@dataclass(frozen=True, eq=False)
class EllipticOperator:
    """Assembled stiffness ``K`` and lumped mass ``M`` on a grid.

    ``stiffness`` is stored both as a CSR matrix and as its two bands
    (``k_diag``, ``k_off``); ``mass`` is the diagonal of ``M``.
    """

    grid: Grid
    k_diag: np.ndarray
    k_off: np.ndarray
    mass: np.ndarray
    stiffness: sp.csr_matrix = field(repr=False)

    @property
    def n(self):
        return self.grid.n

    @property
    def measure(self):
        """Discrete domain measure ``trace(M)``."""
        return float(self.mass.sum())

    @property
    def a_diag(self):
        return self.k_diag + self.mass

    @property
    def a_matrix(self):
        """``K + M`` as a CSR matrix."""
        return (self.stiffness + sp.diags(self.mass)).tocsr()

    def apply(self, v):
        """Return ``(K + M) v``."""
        v = check_field(self, v)
        out = self.a_diag * v
        out[:-1] += self.k_off * v[1:]
        out[1:] += self.k_off * v[:-1]
        return out

    def apply_stiffness(self, v):
        v = check_field(self, v)
        out = self.k_diag * v
        out[:-1] += self.k_off * v[1:]
        out[1:] += self.k_off * v[:-1]
        return out


def assemble_operator(grid):
    """Assemble P1 stiffness (midpoint-weighted) and lumped mass on ``grid``."""
    h = grid.h
    w = grid.element_weights()
    ke = w / h
    k_diag = np.zeros(grid.n)
    k_diag[:-1] += ke
    k_diag[1:] += ke
    k_off = -ke
    mass = np.zeros(grid.n)
    mass[:-1] += 0.5 * h * w
    mass[1:] += 0.5 * h * w
    stiffness = sp.diags([k_off, k_diag, k_off], [-1, 0, 1], format="csr")
    return EllipticOperator(grid=grid, k_diag=k_diag, k_off=k_off, mass=mass, stiffness=stiffness)


def apply_A(op, v):
    return op.apply(v)


def check_field(op, v):
    """Coerce ``v`` to a float array matching ``op``'s grid."""
    v = np.asarray(v, dtype=float)
    if v.shape != (op.n,):
        raise ValueError(f"field has shape {v.shape}, grid has {op.n} nodes")
    return v
