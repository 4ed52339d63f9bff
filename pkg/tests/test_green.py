import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_surface import green


def _fd_hessian(dx, k, h=1e-4):
    # d^2 g / dx_i dx_j by central differences of the scalar kernel
    H = np.zeros((3, 3))
    E = np.eye(3) * h
    g = lambda x: green.scalar_g0(np.linalg.norm(x), kappa=k)
    for i in range(3):
        for j in range(3):
            H[i, j] = (g(dx + E[i] + E[j]) - g(dx + E[i] - E[j]) - g(dx - E[i] + E[j]) + g(dx - E[i] - E[j])) / (4 * h * h)
    return H


def _fd_grad(f, dx, h=1e-5):
    return np.array([(f(dx + h * e) - f(dx - h * e)) / (2 * h) for e in np.eye(3)])


def test_scalar_examples():
    assert green.scalar_g0(2.0) == pytest.approx(0.5)
    assert green.scalar_g0(1.0, 1.0, 1.0, 1.0) == pytest.approx(np.exp(-1.0), rel=1e-15)
    assert green.scalar_g0(0.5, 4.0, 1.0, 2.0) == pytest.approx(np.exp(-2.0) / 0.5, rel=1e-15)
    with pytest.raises(ValueError):
        green.scalar_g0(0.0)


def test_dyadic_EE_finite_differences():
    dx = np.array([1.0, 0.0, 0.0])
    k = 0.7
    G = green.dyadic_EE(dx, 1.0, 1.0, k)
    # derivatives with respect to x and x' of g(x - x') differ by a sign
    expected = _fd_hessian(dx, k) - k * k * green.scalar_g0(1.0, kappa=k) * np.eye(3)
    assert np.allclose(G, expected, rtol=1e-6, atol=1e-8)


def test_singular_point():
    with pytest.raises(green.SingularPointError):
        green.dyadic_EE(np.zeros(3))


def test_curl_block_finite_differences():
    dx = np.array([0.5, 0.5, 0.0])
    G = green.dyadic_all(dx, 1.0, 1.0, 1.0)
    grad = _fd_grad(lambda x: green.scalar_g0(np.linalg.norm(x), kappa=1.0), dx)
    expected = -np.einsum("ijk,k->ij", green.LEVI_CIVITA, grad)
    assert np.allclose(G.gHE, expected, atol=1e-6)


def test_decay_envelope():
    for d in (5.0, 10.0):
        G = green.dyadic_EE(np.array([d, 0.0, 0.0]), 1.0, 1.0, 1.0)
        env = np.exp(-d) / d
        assert env / 10 < np.abs(G).max() < 10 * env


vec = st.lists(st.floats(min_value=-3, max_value=3), min_size=3, max_size=3).filter(
    lambda v: 0.3 < np.linalg.norm(v)
)


@settings(max_examples=50, deadline=None)
@given(vec, st.floats(1.0, 5.0), st.floats(1.0, 3.0), st.floats(0.1, 3.0))
def test_reciprocity(v, eps, mu, kappa):
    dx = np.asarray(v)
    a = green.dyadic_all(dx, eps, mu, kappa)
    b = green.dyadic_all(-dx, eps, mu, kappa)
    scale = np.abs(a.gEE).max() + np.abs(a.gHE).max()
    assert np.abs(a.gEE - b.gEE.T).max() <= 1e-13 * scale
    assert np.abs(a.gHH - b.gHH.T).max() <= 1e-13 * scale
    assert np.abs(a.gEH + b.gHE.T).max() <= 1e-13 * scale


@settings(max_examples=30, deadline=None)
@given(vec, st.floats(0.1, 3.0))
def test_vacuum_blocks_coincide(v, kappa):
    G = green.dyadic_all(np.asarray(v), 1.0, 1.0, kappa)
    assert np.allclose(G.gEE, G.gHH, rtol=0, atol=1e-13 * np.abs(G.gEE).max())


def test_grad_gEE_finite_differences():
    dx = np.array([0.4, -0.7, 0.9])
    G = green.dyadic_all(dx, 2.0, 1.3, 0.8)
    fd = _fd_grad(lambda x: green.dyadic_EE(x, 2.0, 1.3, 0.8), dx, 1e-5)
    assert np.allclose(G.grad_gEE, fd, rtol=1e-6, atol=1e-8)


def test_wave_equation_residual():
    # curl curl G + eps mu kappa^2 G = 0 away from the source, column by column
    eps, mu, kappa, h = 2.0, 1.5, 0.9, 1e-3
    dx = np.array([0.8, 0.6, -1.1])
    G = lambda x: green.dyadic_EE(x, eps, mu, kappa)

    def second(i, j, x):
        ei, ej = np.eye(3)[i] * h, np.eye(3)[j] * h
        return (G(x + ei + ej) - G(x + ei - ej) - G(x - ei + ej) + G(x - ei - ej)) / (4 * h * h)

    lap = sum(second(i, i, dx) for i in range(3))
    graddiv = np.array([[sum(second(i, a, dx)[a, c] for a in range(3)) for c in range(3)] for i in range(3)])
    residual = graddiv - lap + eps * mu * kappa**2 * G(dx)
    assert np.abs(residual).max() < 1e-3 * np.abs(G(dx)).max()


def test_planar_blocks():
    P = green.planar_blocks(1.0, [1.0, 2.0, 3.0], 2.0, 1.0)
    assert np.allclose(P.Gt_curl + P.Gt_curl.T, 0)
    assert np.allclose(P.Gt, P.Gt.T) and np.allclose(P.Gt_curlcurl, P.Gt_curlcurl.T)
    assert np.allclose(green.planar_blocks(1.0, [0, 0, 2.0]).Gt_curlcurl, np.diag([4.0, 4.0, 0.0]))
    # (q^2 - q q^T) + k^2 (I + q q^T / k^2) = (k^2 + q^2) I
    k2 = 2.0
    assert np.allclose(P.Gt_curlcurl + k2 * P.Gt, P.denominator * np.eye(3), atol=1e-12)


def test_qz_contour_integral():
    from scipy.integrate import quad

    p = 2.0
    val = quad(lambda q: 1.0 / (p * p + q * q), -np.inf, np.inf)[0]
    assert val == pytest.approx(np.pi / p, rel=1e-10)
