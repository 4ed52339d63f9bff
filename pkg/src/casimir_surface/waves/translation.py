"""Translation matrices between two expansion centres on the z-axis.

``U^{(12)}`` re-expands outgoing waves about ``X_2 = X_1 + d z`` as regular
waves about ``X_1``:

    Phi_{b,out}(x - X_2) = sum_a U^{(12)}_ab Phi_{a,reg}(x - X_1),  |x - X_1| < d,

and ``U^{(21)}`` does the same from ``X_1`` to ``X_2``.  The coefficients are
obtained by projecting sampled fields onto the regular waves on a sphere of
radius ``d/2`` about the expansion centre.  Translation along z conserves
``m``; each matrix is stored per ``m``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import roots_legendre

from .functions import OUTGOING, REGULAR, PartialWaveIndex, wave

PROJECTION_TOLERANCE = 1e-6


class TranslationAccuracyError(RuntimeError):
    """The projected expansion does not reproduce the translated field."""


@dataclass
class TranslationMatrix:
    """Translation coefficients at one azimuthal order.

    Attributes
    ----------
    data : ndarray, shape (n, n), complex
        ``data[a, b]`` multiplies the regular wave ``a`` in the expansion of
        the outgoing wave ``b``.
    indices : list of PartialWaveIndex
        Shared row and column labels, all with the same ``m``.
    d : float
        Signed displacement of the source centre along z.
    kappa : float
    residual : float
        Relative L2 error of the projected expansion on the sampling sphere.
    """

    data: np.ndarray
    indices: list
    d: float
    kappa: float
    residual: float


def _sphere_rule(n_theta, n_phi):
    t, wt = roots_legendre(n_theta)
    phi = 2 * np.pi * np.arange(n_phi) / n_phi
    ct, ph = np.meshgrid(t, phi, indexing="ij")
    st = np.sqrt(1 - ct * ct)
    dirs = np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=-1).reshape(-1, 3)
    w = np.repeat(wt, n_phi) * (2 * np.pi / n_phi)
    return dirs, w


def _indices(l_max, m):
    return [PartialWaveIndex(p, l, m) for l in range(max(1, abs(m)), l_max + 1) for p in ("M", "N")]


def _field_samples(field, idx, kind, pts, kappa):
    return wave(field, idx, kind, pts, kappa).ravel()


def fit_order(l_max, ratio=0.5, tol=1e-13):
    """Projection basis size for sources up to ``l_max``.

    The coefficient of order ``l`` for a source of order ``l'`` decays like
    ``binom(l + l', l) ratio^l`` with ``ratio`` the sampling radius over the
    distance; the basis is extended until that bound drops below ``tol``.
    """
    from math import comb

    L = l_max + 10
    while comb(L + l_max, l_max) * ratio**L > tol:
        L += 1
    return L


def translation_matrix(d, kappa, l_max, m, field="E", fit_l=None, n_theta=None, check=True):
    """Translation coefficients ``U`` at azimuthal order ``m``.

    Parameters
    ----------
    d : float
        Displacement of the source centre relative to the expansion centre
        along z.  ``d > 0`` gives ``U^{(12)}``, ``d < 0`` gives ``U^{(21)}``.
    kappa : float
    l_max : int
        Largest multipole kept in the returned matrix.
    m : int
    field : {"E", "H"}
        Waves used for the projection; both give the same matrix.
    fit_l : int, optional
        Largest multipole of the projection basis; defaults to
        :func:`fit_order`.
    n_theta : int, optional
        Gauss-Legendre nodes in ``cos(theta)``.
    check : bool
        Raise :class:`TranslationAccuracyError` when the projected
        expansion misses the sampled field by more than
        ``PROJECTION_TOLERANCE``.

    Returns
    -------
    TranslationMatrix
    """
    if d == 0:
        raise ValueError("translation distance must be nonzero")
    if abs(m) > l_max:
        raise ValueError("|m| exceeds l_max")
    L = fit_l or fit_order(l_max)
    # products of fields with equal m vary as exp(i k phi) with |k| <= 2, so four
    # azimuthal nodes integrate them exactly; L + 2 polar nodes cover degree 2L
    n_theta = n_theta or L + 2
    dirs, w = _sphere_rule(n_theta, 4)
    rho = 0.5 * abs(d)
    pts = rho * dirs
    shift = np.array([0.0, 0.0, d])
    fit = _indices(L, m)
    keep = _indices(l_max, m)
    sw = np.sqrt(np.repeat(w, 3))
    basis = np.stack([_field_samples(field, i, REGULAR, pts, kappa) for i in fit], axis=1) * sw[:, None]
    target = np.stack([_field_samples(field, i, OUTGOING, pts - shift, kappa) for i in keep], axis=1) * sw[:, None]
    # regular waves of high order are tiny on the sampling sphere; scale columns first
    # (max-abs scaling: squared entries of the highest orders can underflow)
    norms = np.abs(basis).max(axis=0)
    live = norms > 0
    coef = np.zeros((len(fit), len(keep)), dtype=complex)
    sol, *_ = np.linalg.lstsq(basis[:, live] / norms[live], target, rcond=None)
    coef[live] = sol / norms[live, None]
    residual = float(np.linalg.norm(basis @ coef - target) / np.linalg.norm(target))
    if check and residual > PROJECTION_TOLERANCE:
        raise TranslationAccuracyError(
            f"projection residual {residual:.2e} exceeds {PROJECTION_TOLERANCE:.0e}; increase fit_l"
        )
    rows = [fit.index(i) for i in keep]
    return TranslationMatrix(coef[rows], keep, float(d), float(kappa), residual)
