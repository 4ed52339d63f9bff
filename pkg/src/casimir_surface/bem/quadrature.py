"""Triangle quadrature rules and analytic 1/R panel potentials."""

import numpy as np
from scipy.special import roots_legendre


def _sym_rule(groups):
    bary, w = [], []
    for weight, (a, b, c) in groups:
        perms = {(a, b, c), (b, c, a), (c, a, b), (a, c, b), (c, b, a), (b, a, c)}
        for p in sorted(perms):
            bary.append(p)
            w.append(weight)
    return np.asarray(bary), np.asarray(w)


# Symmetric rules (Dunavant); weights sum to one.
_RULES = {
    1: _sym_rule([(1.0, (1 / 3, 1 / 3, 1 / 3))]),
    2: _sym_rule([(1 / 3, (2 / 3, 1 / 6, 1 / 6))]),
    4: _sym_rule(
        [
            (0.223381589678011, (0.108103018168070, 0.445948490915965, 0.445948490915965)),
            (0.109951743655322, (0.816847572980459, 0.091576213509771, 0.091576213509771)),
        ]
    ),
    5: _sym_rule(
        [
            (0.225, (1 / 3, 1 / 3, 1 / 3)),
            (0.132394152788506, (0.059715871789770, 0.470142064105115, 0.470142064105115)),
            (0.125939180544827, (0.797426985353087, 0.101286507323456, 0.101286507323456)),
        ]
    ),
}


def collapsed_gauss_rule(n):
    """Conical-product Gauss rule with ``n * n`` points on the unit triangle.

    Exact for polynomials of degree ``2 n - 2``.
    """
    x, w = roots_legendre(n)
    u, wu = 0.5 * (x + 1), 0.5 * w
    U, V = np.meshgrid(u, u, indexing="ij")
    W = np.outer(wu, wu) * (1 - U)
    a = U.ravel()
    b = (V * (1 - U)).ravel()
    bary = np.column_stack([1 - a - b, a, b])
    weights = 2.0 * W.ravel()
    return bary, weights / weights.sum()


def triangle_rule(degree):
    """Barycentric points and weights (summing to one) exact to ``degree``."""
    if degree in _RULES:
        return _RULES[degree]
    for d in sorted(_RULES):
        if d >= degree:
            return _RULES[d]
    return collapsed_gauss_rule((degree + 3) // 2)


def panel_potentials(x, tri, normal):
    """Analytic integrals of ``1/R`` over flat triangles.

    Parameters
    ----------
    x : ndarray, shape (..., 3)
        Observation points.
    tri : ndarray, shape (..., 3, 3)
        Triangle vertices ``tri[..., k, :]`` in counter-clockwise order
        about ``normal``.
    normal : ndarray, shape (..., 3)
        Unit normals.

    Returns
    -------
    I0 : ndarray, shape (...)
        ``int 1/R dA'``.
    Iv : ndarray, shape (..., 3)
        ``int (x' - x)/R dA'``.
    gradI0 : ndarray, shape (..., 3)
        Gradient of ``I0`` with respect to ``x``; on the panel plane the
        normal component is the principal value, zero.
    """
    x = np.asarray(x, dtype=float)
    d = np.einsum("...k,...k->...", x - tri[..., 0, :], normal)
    rho = x - d[..., None] * normal
    ad = np.abs(d)
    I0 = np.zeros(d.shape)
    Irho = np.zeros(rho.shape)
    grad = np.zeros(rho.shape)
    solid = np.zeros(d.shape)
    for i in range(3):
        a = tri[..., (i + 1) % 3, :]
        b = tri[..., (i + 2) % 3, :]
        edge = b - a
        length = np.linalg.norm(edge, axis=-1)
        lhat = edge / length[..., None]
        uhat = np.cross(lhat, normal)
        P0 = np.einsum("...k,...k->...", a - rho, uhat)
        lm = np.einsum("...k,...k->...", a - rho, lhat)
        lp = lm + length
        R02 = P0 * P0 + d * d
        Rp = np.sqrt(R02 + lp * lp)
        Rm = np.sqrt(R02 + lm * lm)
        # log((R+ + l+)/(R- + l-)) evaluated without cancellation
        with np.errstate(divide="ignore", invalid="ignore"):
            f_pos = np.log((Rp + lp) / (Rm + lm))
            f_neg = np.log((Rm - lm) / (Rp - lp))
        f2 = np.where(lm >= 0, f_pos, np.where(lp <= 0, f_neg, f_pos))
        f2 = np.where(np.isfinite(f2), f2, 0.0)
        beta = np.arctan2(P0 * lp, R02 + ad * Rp) - np.arctan2(P0 * lm, R02 + ad * Rm)
        I0 += P0 * f2 - ad * beta
        Irho += 0.5 * uhat * (R02 * f2 + lp * Rp - lm * Rm)[..., None]
        grad -= uhat * f2[..., None]
        solid += beta
    grad -= (np.sign(d) * solid)[..., None] * normal
    Iv = Irho - (d * I0)[..., None] * normal
    return I0, Iv, grad
