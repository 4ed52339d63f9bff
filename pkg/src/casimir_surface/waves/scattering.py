"""Two-body interaction energy from T-matrices and translation matrices.

With body 1 at the origin and body 2 at ``d z``, the interaction term at
one imaginary frequency is

    log det(1 - T1 U12 T2 U21),

where ``U12`` re-expands waves leaving body 2 about body 1 and ``U21`` the
reverse.  Translation along z conserves ``m``, so for bodies whose
T-matrices are diagonal in ``m`` the determinant factorizes into one block
per ``m``.
"""

import numpy as np

from .functions import wave_indices
from .translation import translation_matrix


class ScatteringError(RuntimeError):
    """The log-determinant is not real or the geometry is invalid."""


def _logdet_one_minus(A):
    sign, logabs = np.linalg.slogdet(np.eye(len(A)) - A)
    value = logabs + np.log(sign)
    if abs(value.imag) > 1e-10 * max(abs(value.real), 1e-300) and abs(value.imag) > 1e-14:
        raise ScatteringError(f"log-determinant has imaginary part {value.imag:.3e}")
    return float(value.real)


def translation_blocks(d, kappa, l_max):
    """``{m: (U12, U21)}`` for ``|m| <= l_max``."""
    return {
        m: (translation_matrix(d, kappa, l_max, m).data, translation_matrix(-d, kappa, l_max, m).data)
        for m in range(-l_max, l_max + 1)
    }


def scattering_energy(T1, T2, d, kappa, l_max=None, per_m=True, translations=None):
    """Interaction term ``log det(1 - T1 U12 T2 U21)`` at one frequency.

    Parameters
    ----------
    T1, T2 : TMatrix
        Body 2 sits at ``d`` along z from body 1.
    d : float
        Centre distance, larger than the sum of the circumscribed radii.
    kappa : float
    l_max : int, optional
        Multipole cutoff; defaults to the smaller T-matrix cutoff.
    per_m : bool
        Assemble one block per ``m`` using the ``m``-diagonal parts of the
        T-matrices; otherwise assemble the full matrix, keeping any
        coupling between different ``m`` in the T-matrices.
    translations : dict, optional
        Precomputed :func:`translation_blocks`.

    Returns
    -------
    float
    """
    if d <= 0:
        raise ScatteringError("the centre distance must be positive")
    l_max = l_max or min(T1.l_max, T2.l_max)
    U = translations or translation_blocks(d, kappa, l_max)
    U = {m: (_cut(U[m][0], m, l_max), _cut(U[m][1], m, l_max)) for m in range(-l_max, l_max + 1)}
    if per_m:
        total = 0.0
        for m in range(-l_max, l_max + 1):
            t1, _ = T1.m_block(m, l_max)
            t2, _ = T2.m_block(m, l_max)
            U12, U21 = U[m]
            total += _logdet_one_minus(t1 @ U12 @ t2 @ U21)
        return total
    return _logdet_one_minus(_full(T1, l_max) @ _full_translation(U, l_max, 0) @ _full(T2, l_max) @ _full_translation(U, l_max, 1))


def _cut(U, m, l_max):
    # rows and columns run over l = max(1, |m|) ... then polarization
    n = 2 * (l_max - max(1, abs(m)) + 1)
    return U[:n, :n]


def adaptive_scattering_energy(tmatrix, d, kappa, l_max=10, tol=1e-6, l_cap=20, step=2):
    """Scattering energy with the multipole cutoff raised until it settles.

    The cutoff grows by ``step`` while dropping the last multipole changes
    the log-determinant by more than ``tol`` relative.

    Parameters
    ----------
    tmatrix : callable
        ``(body, l_max) -> TMatrix`` for ``body`` in ``(0, 1)``.
    d, kappa : float
    l_max : int
        Starting cutoff.
    tol : float
    l_cap : int
        Largest cutoff tried.

    Returns
    -------
    value : float
    l_used : int
    converged : bool
    """
    L = l_max
    while True:
        T1, T2 = tmatrix(0, L), tmatrix(1, L)
        U = translation_blocks(d, kappa, L)
        value = scattering_energy(T1, T2, d, kappa, L, translations=U)
        previous = scattering_energy(T1, T2, d, kappa, L - 1, translations=U)
        settled = abs(value - previous) <= tol * abs(value)
        if settled or L >= l_cap:
            return value, L, settled
        L = min(L + step, l_cap)


def _full(T, l_max):
    return T.truncated(l_max).data


def _full_translation(U, l_max, which):
    indices = wave_indices(l_max)
    out = np.zeros((len(indices), len(indices)), dtype=complex)
    for m in range(-l_max, l_max + 1):
        sel = [k for k, i in enumerate(indices) if i.m == m]
        out[np.ix_(sel, sel)] = U[m][which]
    return out
