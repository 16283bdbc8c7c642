"""
Riesz map of V = H^1 onto its dual and the H, V, V* norms on nodal fields.

The discrete Riesz map is the Galerkin one: for a field ``v`` (identified with
the functional ``z -> z^T M v``) its preimage ``F^{-1} v`` solves
``(K + M) z = M v``. With this choice

    |v|_{V*}^2 = v^T M (K + M)^{-1} M v  <=  v^T M v = |v|_H^2  <=  v^T (K + M) v

hold exactly, as in the continuous embeddings V c H c V*.
"""
import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded

from .grid import check_field


class DualEngine:
    """Cached banded Cholesky factor of ``K + M`` plus norm helpers.

    Instances are immutable once built and can be shared between threads.
    """

    def __init__(self, op):
        self.op = op
        ab = np.zeros((2, op.n))
        ab[0, 1:] = op.k_off
        ab[1] = op.a_diag
        self._chol = cholesky_banded(ab, lower=False)

    @property
    def mass(self):
        return self.op.mass

    def solve_a(self, rhs):
        """Solve ``(K + M) z = rhs``."""
        return cho_solve_banded((self._chol, False), np.asarray(rhs, dtype=float))

    def apply_A(self, v):
        return self.op.apply(v)

    def riesz_inverse(self, v):
        """``F^{-1} v``: the V-representative of the functional ``M v``."""
        v = check_field(self.op, v)
        return self.solve_a(self.mass * v)

    def inner_vstar(self, v, w):
        return float(self.riesz_inverse(w) @ (self.mass * v))

    def vstar_norm(self, v):
        v = check_field(self.op, v)
        z = self.solve_a(self.mass * v)
        return float(np.sqrt(max(z @ (self.mass * v), 0.0)))

    def h_norm(self, v):
        v = check_field(self.op, v)
        return float(np.sqrt(v @ (self.mass * v)))

    def v_norm(self, v):
        v = check_field(self.op, v)
        return float(np.sqrt(max(v @ self.op.apply(v), 0.0)))

    def compute_f(self, g):
        """Weak Neumann solve ``(K + M) f = M g``; converts a source g into f."""
        g = check_field(self.op, g)
        return self.solve_a(self.mass * g)

    def discrete_operator(self, v):
        """Nodal representative ``M^{-1} (K + M) v`` of ``(-Laplace + 1) v``."""
        return self.op.apply(v) / self.mass

    def vstar_norms(self, fields):
        """Row-wise V* norms of a 2D array of fields."""
        fields = np.atleast_2d(np.asarray(fields, dtype=float))
        mv = fields * self.mass
        z = self.solve_a(mv.T).T
        return np.sqrt(np.maximum(np.einsum("ij,ij->i", z, mv), 0.0))
