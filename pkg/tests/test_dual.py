import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from chreg import DualEngine, assemble_operator, build_grid


@pytest.fixture(scope="module")
def two_node():
    return DualEngine(assemble_operator(build_grid("interval", 0, 1, 2)))


@pytest.fixture(scope="module")
def radial():
    return DualEngine(assemble_operator(build_grid("radial_exterior", 1, 6, 51, 2)))


def test_riesz_inverse_two_nodes(two_node):
    # [[1.5, -1], [-1, 1.5]] z = (0.5, 0)
    np.testing.assert_allclose(two_node.riesz_inverse([1.0, 0.0]), [0.6, 0.4], rtol=1e-14)
    np.testing.assert_array_equal(two_node.riesz_inverse([0.0, 0.0]), [0.0, 0.0])


def test_norms_two_nodes(two_node):
    v = np.array([1.0, 0.0])
    assert two_node.vstar_norm(v) == pytest.approx(np.sqrt(0.3), rel=1e-14)
    assert two_node.h_norm(v) == pytest.approx(np.sqrt(0.5), rel=1e-14)
    assert two_node.v_norm(v) == pytest.approx(np.sqrt(1.5), rel=1e-14)
    zero = np.zeros(2)
    assert two_node.vstar_norm(zero) == two_node.h_norm(zero) == two_node.v_norm(zero) == 0.0


def test_constants_are_fixed_points(radial):
    c = -2.5
    v = np.full(radial.op.n, c)
    np.testing.assert_allclose(radial.riesz_inverse(v), v, rtol=1e-12)
    np.testing.assert_allclose(radial.compute_f(v), v, rtol=1e-12)
    expected = abs(c) * np.sqrt(radial.op.measure)
    for norm in (radial.vstar_norm, radial.h_norm, radial.v_norm):
        assert norm(v) == pytest.approx(expected, rel=1e-12)


def test_riesz_inverse_against_dense_solve(radial):
    # independent dense route
    A = radial.op.a_matrix.toarray()
    v = np.random.default_rng(7).normal(size=radial.op.n)
    z = radial.riesz_inverse(v)
    np.testing.assert_allclose(z, np.linalg.solve(A, radial.mass * v), rtol=1e-11, atol=1e-12)
    mv = radial.mass * v
    assert np.linalg.norm(A @ z - mv) <= 1e-10 * np.linalg.norm(mv)


def test_vstar_norms_batch_matches_single(radial):
    fields = np.random.default_rng(1).normal(size=(5, radial.op.n))
    np.testing.assert_allclose(radial.vstar_norms(fields), [radial.vstar_norm(f) for f in fields], rtol=1e-13)


def test_compute_f_cosine():
    errs = []
    for n in (101, 201):
        eng = DualEngine(assemble_operator(build_grid("interval", 0, 1, n)))
        x = eng.op.grid.nodes
        f = eng.compute_f((np.pi ** 2 + 1) * np.cos(np.pi * x))
        errs.append(np.max(np.abs(f - np.cos(np.pi * x))))
    assert errs[1] < 1e-4
    assert 3.6 < errs[0] / errs[1] < 4.4


field = arrays(np.float64, 51, elements=st.floats(-1e3, 1e3, allow_nan=False))


@settings(max_examples=200, deadline=None)
@given(field)
def test_norm_chain_property(radial, v):
    vs, h, vv = radial.vstar_norm(v), radial.h_norm(v), radial.v_norm(v)
    assert vs <= h * (1 + 1e-10) + 1e-300
    assert h <= vv * (1 + 1e-10) + 1e-300


@settings(max_examples=100, deadline=None)
@given(field)
def test_duality_identity_property(radial, v):
    z = radial.riesz_inverse(v)
    pairing = z @ (radial.mass * v)
    assert pairing == pytest.approx(radial.v_norm(z) ** 2, rel=1e-10, abs=1e-300)


@settings(max_examples=100, deadline=None)
@given(field)
def test_round_trip_property(radial, v):
    back = radial.compute_f(radial.discrete_operator(v))
    assert np.linalg.norm(back - v) <= 1e-10 * np.linalg.norm(v) + 1e-300
