"""Partial-wave expansion of the free dyadic Green function.

For ``|x| < |x'|``

    G^{ab}(x - x') = lam sum_{p,l,m} (-1)^{s(b)} (-1)^m
                     Phi^a_{plm,reg}(x) (x) Phi^b_{pl,-m,out}(x')

with ``s(E) = 0``, ``s(H) = 1`` and ``lam = -8 kappa^3``; for
``|x| > |x'|`` the regular and outgoing waves trade places.  The constant
follows from the normalization ``k_l(z) = sqrt(pi/2z) K_{l+1/2}(z)`` of the
outgoing radial functions; with ``(pi/2) k_l`` as the radial function it
would read ``-4 pi kappa^3``.
"""

import numpy as np

from .. import green
from .functions import OUTGOING, REGULAR, PartialWaveIndex, wave

FIELDS = ("E", "H")


def expansion_constant(kappa):
    """Prefactor ``lam`` of the expansion in this package's wave normalization."""
    return -8.0 * kappa**3


def field_sign(field):
    """``(-1)^{s(field)}``: ``+1`` for ``E`` and ``-1`` for ``H``."""
    return 1.0 if field == "E" else -1.0


def green_series(x, x_prime, kappa, l_max):
    """Truncated partial-wave series of the four Green blocks.

    Returns
    -------
    dict
        ``{"EE": 3x3, "EH": ..., "HE": ..., "HH": ...}`` complex arrays.
    """
    x = np.asarray(x, dtype=float)
    xp = np.asarray(x_prime, dtype=float)
    r, rp = np.linalg.norm(x), np.linalg.norm(xp)
    if np.isclose(r, rp):
        raise ValueError("the expansion needs |x| != |x'|")
    kind_x, kind_xp = (REGULAR, OUTGOING) if r < rp else (OUTGOING, REGULAR)
    lam = expansion_constant(kappa)
    out = {a + b: np.zeros((3, 3), dtype=complex) for a in FIELDS for b in FIELDS}
    for l in range(1, l_max + 1):
        for m in range(-l, l + 1):
            for p in ("M", "N"):
                left = {a: wave(a, PartialWaveIndex(p, l, m), kind_x, x, kappa) for a in FIELDS}
                right = {b: wave(b, PartialWaveIndex(p, l, -m), kind_xp, xp, kappa) for b in FIELDS}
                for a in FIELDS:
                    for b in FIELDS:
                        out[a + b] += lam * field_sign(b) * (-1) ** m * np.outer(left[a], right[b])
    return out


def verify_pw_expansion(x, x_prime, kappa, l_max):
    """Entrywise residual of the truncated series against the closed forms.

    Parameters
    ----------
    x, x_prime : array_like, shape (3,)
        Points with ``|x| != |x'|``.
    kappa : float
    l_max : int

    Returns
    -------
    dict
        ``{"EE": residual, ...}`` with ``|series - closed form|`` as real
        3x3 arrays.
    """
    series = green_series(x, x_prime, kappa, l_max)
    exact = green.dyadic_all(np.asarray(x, float) - np.asarray(x_prime, float), 1.0, 1.0, kappa)
    blocks = {"EE": exact.gEE, "EH": exact.gEH, "HE": exact.gHE, "HH": exact.gHH}
    return {k: np.abs(series[k] - blocks[k]) for k in blocks}
