"""Free dyadic Green functions of a homogeneous medium on the imaginary axis.

Normalization
-------------
The scalar kernel is ``g0(r) = exp(-k r) / r`` with ``k = kappa * sqrt(eps * mu)``.
It solves ``(laplacian - k**2) g0 = -4 pi delta``, so ``GREEN_SOURCE_FACTOR``
(= 4 pi) is the constant that converts between this normalization and a
Green function solving the same equation with a unit delta source.

The dyadic blocks are

    gEE = (1/eps) grad grad g0 - mu kappa**2 g0 I
    gHH = (1/mu)  grad grad g0 - eps kappa**2 g0 I
    gHE_ij = -kappa e_ijk d_k g0
    gEH_ij = +kappa e_ijk d_k g0

with all derivatives taken with respect to the first argument of
``g0(x - x')``. The delta-function term that accompanies the magnetic block at
coincident points is dropped; boundary-element assembly never evaluates the
kernels at ``x = x'``.
"""

from dataclasses import dataclass

import numpy as np

GREEN_SOURCE_FACTOR = 4.0 * np.pi

# Levi-Civita symbol, LEVI_CIVITA[i, j, k] = e_ijk.
LEVI_CIVITA = np.zeros((3, 3, 3))
LEVI_CIVITA[0, 1, 2] = LEVI_CIVITA[1, 2, 0] = LEVI_CIVITA[2, 0, 1] = 1.0
LEVI_CIVITA[0, 2, 1] = LEVI_CIVITA[2, 1, 0] = LEVI_CIVITA[1, 0, 2] = -1.0


class SingularPointError(ValueError):
    """Raised when a Green function is evaluated at coincident points."""


def wavenumber(eps, mu, kappa):
    """Screening constant ``kappa * sqrt(eps * mu)`` of a medium."""
    return kappa * np.sqrt(eps * mu)


def scalar_g0(r, eps=1.0, mu=1.0, kappa=0.0):
    """Scalar Helmholtz kernel ``exp(-kappa sqrt(eps mu) r) / r``.

    Parameters
    ----------
    r : float or ndarray
        Distance, strictly positive.
    eps, mu : float
        Relative permittivity and permeability of the medium.
    kappa : float
        Imaginary-axis wavenumber ``xi / c``.

    Returns
    -------
    float or ndarray
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise SingularPointError("scalar_g0 requires r > 0")
    out = np.exp(-wavenumber(eps, mu, kappa) * r) / r
    return out[()] if out.ndim == 0 else out


def _radial_factors(r, k, order):
    # g = f(r); with A = f'/r, B = A'/r, C = B'/r the Cartesian derivatives are
    #   d_i g = A x_i
    #   d_i d_j g = B x_i x_j + A d_ij
    #   d_i d_j d_l g = C x_i x_j x_l + B (d_ij x_l + d_il x_j + d_jl x_i)
    kr = k * r
    e = np.exp(-kr)
    out = [e / r, -e * (1.0 + kr) / r**3]
    if order >= 2:
        out.append(e * (kr * kr + 3.0 * kr + 3.0) / r**5)
    if order >= 3:
        out.append(-e * (kr**3 + 6.0 * kr * kr + 15.0 * kr + 15.0) / r**7)
    return out


def g0_derivatives(dx, k, order=2):
    """Scalar kernel ``exp(-k r)/r`` and its Cartesian derivatives.

    Parameters
    ----------
    dx : array_like, shape (..., 3)
        Separation vectors ``x - x'``.
    k : float
        Screening constant of the medium.
    order : int
        Highest derivative order returned (0 to 3).

    Returns
    -------
    list of ndarray
        ``[g, grad, hess, third]`` truncated after ``order``; shapes
        ``(...)``, ``(..., 3)``, ``(..., 3, 3)``, ``(..., 3, 3, 3)``.
    """
    dx = np.asarray(dx, dtype=float)
    r = np.linalg.norm(dx, axis=-1)
    if np.any(r == 0):
        raise SingularPointError("Green function evaluated at coincident points")
    fac = _radial_factors(r, k, order)
    out = [fac[0]]
    if order >= 1:
        out.append(fac[1][..., None] * dx)
    if order >= 2:
        eye = np.eye(3)
        xx = dx[..., :, None] * dx[..., None, :]
        out.append(fac[2][..., None, None] * xx + fac[1][..., None, None] * eye)
    if order >= 3:
        eye = np.eye(3)
        xxx = xx[..., None] * dx[..., None, None, :]
        sym = (
            eye[:, :, None] * dx[..., None, None, :]
            + eye[:, None, :] * dx[..., None, :, None]
            + eye[None, :, :] * dx[..., :, None, None]
        )
        out.append(fac[3][..., None, None, None] * xxx + fac[2][..., None, None, None] * sym)
    return out


def _check_kappa(kappa):
    if kappa <= 0:
        raise ValueError("dyadic Green functions require kappa > 0")


def dyadic_EE(dx, eps=1.0, mu=1.0, kappa=1.0):
    """Electric-electric block ``(1/eps) grad grad g0 - mu kappa^2 g0 I``.

    Parameters
    ----------
    dx : array_like, shape (..., 3)
        Separation ``x - x'``.

    Returns
    -------
    ndarray, shape (..., 3, 3)
    """
    _check_kappa(kappa)
    g, _, h = g0_derivatives(dx, wavenumber(eps, mu, kappa), 2)
    return h / eps - mu * kappa**2 * g[..., None, None] * np.eye(3)


def dyadic_HH(dx, eps=1.0, mu=1.0, kappa=1.0):
    """Magnetic-magnetic block, ``dyadic_EE`` with ``eps`` and ``mu`` exchanged."""
    _check_kappa(kappa)
    g, _, h = g0_derivatives(dx, wavenumber(eps, mu, kappa), 2)
    return h / mu - eps * kappa**2 * g[..., None, None] * np.eye(3)


def curl_block(grad, kappa):
    """Return ``-kappa e_ijk grad_k`` for gradients of shape (..., 3)."""
    return -kappa * np.einsum("ijk,...k->...ij", LEVI_CIVITA, grad)


@dataclass
class GreenEval:
    """All four dyadic blocks at one or many separations.

    Attributes
    ----------
    gEE, gHH, gEH, gHE : ndarray, shape (..., 3, 3)
    grad_gEE : ndarray, shape (..., 3, 3, 3)
        ``grad_gEE[..., l, i, j]`` is the derivative of ``gEE[..., i, j]``
        with respect to the ``l``-th component of the first argument.
    """

    gEE: np.ndarray
    gHH: np.ndarray
    gEH: np.ndarray
    gHE: np.ndarray
    grad_gEE: np.ndarray


def dyadic_all(dx, eps=1.0, mu=1.0, kappa=1.0):
    """Evaluate every dyadic block plus the gradient of the electric block.

    Parameters
    ----------
    dx : array_like, shape (..., 3)
        Separation ``x - x'``, nonzero.
    eps, mu, kappa : float
        Medium response and imaginary-axis wavenumber (``kappa > 0``).

    Returns
    -------
    GreenEval
    """
    _check_kappa(kappa)
    g, grad, h, t = g0_derivatives(dx, wavenumber(eps, mu, kappa), 3)
    eye = np.eye(3)
    gEE = h / eps - mu * kappa**2 * g[..., None, None] * eye
    gHH = h / mu - eps * kappa**2 * g[..., None, None] * eye
    gHE = curl_block(grad, kappa)
    # third-derivative tensor is symmetric; move the derivative index first
    grad_gEE = t / eps - mu * kappa**2 * grad[..., :, None, None] * eye
    return GreenEval(gEE=gEE, gHH=gHH, gEH=-gHE, gHE=gHE, grad_gEE=grad_gEE)


@dataclass
class PlanarGreenBlocks:
    """Numerators of the Fourier-space Green tensor and its curls.

    The full Fourier-space blocks are ``mu / (eps mu kappa^2 + q^2)`` times
    ``Gt``, ``Gt_curl`` and ``Gt_curlcurl`` respectively.
    """

    Gt: np.ndarray
    Gt_curl: np.ndarray
    Gt_curlcurl: np.ndarray
    denominator: float


def planar_blocks(kappa, q, eps=1.0, mu=1.0):
    """Fourier-space numerators for a plane-wave vector ``q``.

    Parameters
    ----------
    kappa : float
        Imaginary-axis wavenumber, positive.
    q : array_like, shape (3,)
        Real wave vector.

    Returns
    -------
    PlanarGreenBlocks
        ``Gt = I + q q^T / (eps mu kappa^2)`` (symmetric), ``Gt_curl`` the
        antisymmetric matrix of ``i q x`` (complex), and
        ``Gt_curlcurl = q^2 I - q q^T``.
    """
    _check_kappa(kappa)
    q = np.asarray(q, dtype=float)
    k2 = eps * mu * kappa**2
    qq = np.outer(q, q)
    q2 = q @ q
    Gt = np.eye(3) + qq / k2
    curl = 1j * np.array(
        [[0.0, -q[2], q[1]], [q[2], 0.0, -q[0]], [-q[1], q[0], 0.0]]
    )
    return PlanarGreenBlocks(Gt=Gt, Gt_curl=curl, Gt_curlcurl=q2 * np.eye(3) - qq, denominator=k2 + q2)
