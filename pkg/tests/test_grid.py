import numpy as np
import pytest

from chreg import ConfigError, apply_A, assemble_operator, build_grid


def test_two_node_interval():
    g = build_grid("interval", 0, 1, 2)
    assert g.h == 1.0
    np.testing.assert_array_equal(g.nodes, [0.0, 1.0])


def test_five_node_interval():
    g = build_grid("interval", 0, 1, 5)
    assert g.h == 0.25
    np.testing.assert_allclose(g.nodes, [0, 0.25, 0.5, 0.75, 1.0])


def test_radial_three_nodes_hand_assembly():
    # weights r at midpoints 1.5 and 2.5, h = 1
    g = build_grid("radial_exterior", 1, 3, 3, dimension=2)
    op = assemble_operator(g)
    np.testing.assert_array_equal(g.nodes, [1, 2, 3])
    K = op.stiffness.toarray()
    np.testing.assert_allclose(K, [[1.5, -1.5, 0], [-1.5, 4.0, -2.5], [0, -2.5, 2.5]])
    np.testing.assert_allclose(op.mass, [0.75, 2.0, 1.25])


def test_radial_dimension_one_matches_interval():
    a = assemble_operator(build_grid("radial_exterior", 1, 3, 7, dimension=1))
    b = assemble_operator(build_grid("interval", 1, 3, 7))
    np.testing.assert_allclose(a.stiffness.toarray(), b.stiffness.toarray())
    np.testing.assert_allclose(a.mass, b.mass)


@pytest.mark.parametrize(
    "kwargs, key",
    [
        (dict(kind="interval", a=0, b=1, n=1), "grid.nodes"),
        (dict(kind="interval", a=0, b=1, n=2.5), "grid.nodes"),
        (dict(kind="interval", a=1, b=1, n=3), "domain.b"),
        (dict(kind="radial_exterior", a=0, b=1, n=3, dimension=2), "domain.a"),
        (dict(kind="radial_exterior", a=1, b=2, n=3, dimension=0), "domain.dimension"),
        (dict(kind="sphere", a=0, b=1, n=3), "domain.kind"),
    ],
)
def test_invalid_grid_names_key(kwargs, key):
    with pytest.raises(ConfigError) as info:
        build_grid(**kwargs)
    assert info.value.key == key


def test_two_node_forms():
    op = assemble_operator(build_grid("interval", 0, 1, 2))
    np.testing.assert_allclose(op.stiffness.toarray(), [[1, -1], [-1, 1]])
    np.testing.assert_allclose(op.mass, [0.5, 0.5])
    np.testing.assert_allclose(apply_A(op, [1.0, 0.0]), [1.5, -1.0])
    np.testing.assert_array_equal(apply_A(op, [0.0, 0.0]), [0.0, 0.0])


@pytest.mark.parametrize("kind, dim", [("interval", 1), ("radial_exterior", 2), ("radial_exterior", 3)])
def test_structural_invariants(kind, dim):
    op = assemble_operator(build_grid(kind, 1.0, 5.0, 41, dim))
    K = op.stiffness.toarray()
    assert np.max(np.abs(K - K.T)) == 0
    delta = 1e-12 * np.max(np.abs(K))
    np.linalg.cholesky(K + delta * np.eye(op.n))
    assert np.all(op.mass > 0)
    np.testing.assert_allclose(K @ np.ones(op.n), 0, atol=1e-12 * np.max(np.abs(K)))
    np.linalg.cholesky(op.a_matrix.toarray())
    c = 1.7
    v = np.full(op.n, c)
    np.testing.assert_allclose(v @ op.apply(v), c * c * op.measure, rtol=1e-13)
    np.testing.assert_allclose(op.apply(v), c * op.mass, rtol=1e-12, atol=1e-12)


def test_apply_matches_dense():
    op = assemble_operator(build_grid("radial_exterior", 1, 4, 13, 2))
    v = np.random.default_rng(3).normal(size=op.n)
    np.testing.assert_allclose(op.apply(v), op.a_matrix.toarray() @ v, rtol=1e-13, atol=1e-13)


def test_apply_dimension_mismatch():
    op = assemble_operator(build_grid("interval", 0, 1, 5))
    with pytest.raises(ValueError):
        op.apply(np.ones(4))


def _cosine_defect(n):
    op = assemble_operator(build_grid("interval", 0, 1, n))
    x = op.grid.nodes
    u = np.cos(np.pi * x)
    defect = (op.apply(u) - (np.pi ** 2 + 1) * op.mass * u) / op.mass
    rayleigh = (u @ op.apply(u)) / (u @ (op.mass * u))
    return np.max(np.abs(defect)), abs(rayleigh - (np.pi ** 2 + 1))


def test_cosine_eigenfunction_second_order():
    coarse = _cosine_defect(101)
    fine = _cosine_defect(201)
    assert coarse[0] < 1e-2
    assert fine[0] < 3e-3
    # halving h should divide both errors by ~4
    assert 3.6 < coarse[0] / fine[0] < 4.4
    assert 3.6 < coarse[1] / fine[1] < 4.4
