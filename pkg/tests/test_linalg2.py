import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from multitime import linalg2
from multitime.magnus import generator_at, ModelParams

I2 = np.eye(2)
Y = np.array([[0, -1j], [1j, 0]])


def traceless(a, b, c, d, e, scale):
    # [[x, y], [z, -x]] with complex x, y, z
    m = np.array([[a + 1j * b, c + 1j * d], [e - 1j * c, -(a + 1j * b)]])
    n = linalg2.spectral_norm(m)
    return m if n == 0 else m * (scale / n)


def taylor_exp(m, terms=30, squarings=6):
    small = m / 2**squarings
    out = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, terms):
        term = term @ small / k
        out = out + term
    for _ in range(squarings):
        out = out @ out
    return out


coord = st.floats(-1, 1, allow_nan=False)


def test_mat_mul_examples():
    A = np.array([[1 + 2j, 3], [0.5j, -1]])
    assert_allclose(linalg2.mat_mul(I2, A), A)
    Z = np.diag([1, -1])
    assert_allclose(linalg2.mat_mul(Z, Z), I2)
    M = np.array([[0, -2j], [2j, 0]])
    assert_allclose(linalg2.mat_mul(M, M), 4 * I2)


def test_commutator_examples():
    assert_allclose(linalg2.commutator(np.diag([1, 2]), np.diag([3, 4])), 0)
    e = np.array([[0, 1], [0, 0]])
    f = np.array([[0, 0], [1, 0]])
    assert_allclose(linalg2.commutator(e, f), np.diag([1, -1]))


@pytest.mark.parametrize("seed", range(5))
def test_generator_commutator_closed_form(seed):
    rng = np.random.default_rng(seed)
    kappa, delta = rng.uniform(0.2, 3), rng.uniform(0, 6)
    t1, t2 = rng.uniform(-2, 2, 2)
    p = ModelParams(kappa, delta)
    got = linalg2.commutator(generator_at(p, t1), generator_at(p, t2))
    expected = 8j * kappa**2 * np.sin(delta * (t2 - t1)) * np.diag([1, -1])
    assert_allclose(got, expected, atol=1e-12)


def test_spectral_norm_examples():
    assert linalg2.spectral_norm(I2) == pytest.approx(1.0)
    assert linalg2.spectral_norm(np.diag([3j, -2])) == pytest.approx(3.0)
    rng = np.random.default_rng(1)
    for d, t in rng.uniform(0, 10, (5, 2)):
        assert linalg2.spectral_norm(generator_at(ModelParams(1.0, d), t)) == pytest.approx(2.0)


def test_spectral_norm_matches_svd():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(50, 2, 2)) + 1j * rng.normal(size=(50, 2, 2))
    assert_allclose(linalg2.spectral_norm(m), np.linalg.norm(m, 2, axis=(-2, -1)), rtol=1e-12)


def test_det_trace_adjoint():
    assert linalg2.det(I2) == 1
    A = np.array([[1 + 1j, 2], [3j, 4]])
    assert_allclose(linalg2.adjoint(linalg2.adjoint(A)), A)
    assert linalg2.trace(A) == 5 + 1j


def test_exp_traceless_examples():
    assert_allclose(linalg2.exp_traceless(np.zeros((2, 2))), I2)
    r = 0.7
    assert_allclose(linalg2.exp_traceless(r * Y), np.cosh(r) * I2 + np.sinh(r) * Y, atol=1e-14)
    assert_allclose(linalg2.exp_traceless(r * Y), taylor_exp(r * Y), atol=1e-13)
    theta = 1.3
    assert_allclose(
        linalg2.exp_traceless(1j * theta * np.diag([-1, 1])),
        np.diag([np.exp(-1j * theta), np.exp(1j * theta)]),
        atol=1e-14,
    )


def test_exp_traceless_rejects_trace():
    with pytest.raises(ValueError):
        linalg2.exp_traceless(np.diag([1.0, 0.0]))


def test_exp_traceless_series_branch_continuous():
    m = np.array([[0, 1], [1e-10, 0]], dtype=complex)
    for eps in (0.99e-4, 1.01e-4):
        z = eps * Y
        assert_allclose(linalg2.exp_traceless(z), taylor_exp(z), atol=1e-15)
    assert_allclose(linalg2.exp_traceless(m), I2 + m, atol=1e-15)


def test_branch_of_p_is_irrelevant():
    z = traceless(0.3, -0.2, 0.5, 0.1, -0.4, 2.0)
    p = np.sqrt(-linalg2.det(z))
    for q in (p, -p):
        u = np.cosh(q) * I2 + np.sinh(q) / q * z
        assert_allclose(u, linalg2.exp_traceless(z), atol=1e-13)


def test_batched_evaluation():
    rng = np.random.default_rng(0)
    zs = np.array([traceless(*rng.uniform(-1, 1, 5), 3.0) for _ in range(20)])
    batch = linalg2.exp_traceless(zs)
    for z, u in zip(zs, batch):
        assert_allclose(u, linalg2.exp_traceless(z))


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord, coord, st.floats(0, 10))
def test_exp_inverse_and_unit_det(a, b, c, d, e, scale):
    z = traceless(a, b, c, d, e, scale)
    u = linalg2.exp_traceless(z)
    assert np.max(np.abs(u @ linalg2.exp_traceless(-z) - I2)) < 1e-12 * max(1.0, np.abs(u).max() ** 2)
    assert abs(linalg2.det(u) - 1) < 1e-12 * max(1.0, np.abs(u).max() ** 2)


@settings(max_examples=200, deadline=None)
@given(coord, coord, coord, coord, coord, st.floats(0, 5))
def test_exp_matches_taylor(a, b, c, d, e, scale):
    z = traceless(a, b, c, d, e, scale)
    u = linalg2.exp_traceless(z)
    assert np.max(np.abs(u - taylor_exp(z))) < 1e-10 * max(1.0, np.abs(u).max())


@settings(max_examples=100, deadline=None)
@given(coord, coord, coord, coord, coord, st.floats(0, 2 * np.pi))
def test_norm_invariances(a, b, c, d, e, phase):
    m = traceless(a, b, c, d, e, 1.5) + np.diag([a, 0])
    n = linalg2.spectral_norm(m)
    assert linalg2.spectral_norm(linalg2.adjoint(m)) == pytest.approx(n, rel=1e-12, abs=1e-15)
    assert linalg2.spectral_norm(np.exp(1j * phase) * m) == pytest.approx(n, rel=1e-12, abs=1e-15)
