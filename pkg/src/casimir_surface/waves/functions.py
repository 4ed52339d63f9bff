"""Modified spherical Bessel functions and vector partial waves.

Partial waves are labelled by a polarization ``p`` (``"M"`` or ``"N"``),
a multipole degree ``l >= 1`` and an order ``|m| <= l``.  The electric waves
are

    Phi_M = curl(x phi) / sqrt(l (l + 1)),   Phi_N = (i / kappa) curl Phi_M,

with ``phi = z_l(kappa r) Y_lm``, ``z_l = i_l`` for regular and ``z_l = k_l``
for outgoing waves.  Magnetic waves follow from ``Phi^H_p = i Phi^E_tau(p)``
with ``tau(M) = N`` and ``tau(N) = M``.  ``Y_lm`` are complex spherical
harmonics with the Condon-Shortley phase.
"""

from dataclasses import dataclass

import numpy as np
from scipy import special

REGULAR = "reg"
OUTGOING = "out"


@dataclass(frozen=True)
class PartialWaveIndex:
    """Label of a vector partial wave."""

    p: str
    l: int
    m: int

    def __post_init__(self):
        if self.p not in ("M", "N"):
            raise ValueError(f"polarization must be 'M' or 'N', got {self.p!r}")
        if self.l < 1 or abs(self.m) > self.l:
            raise ValueError(f"invalid multipole (l={self.l}, m={self.m})")


def wave_indices(l_max, m=None):
    """All partial-wave labels up to ``l_max``.

    Ordered by ``l``, then ``m``, then polarization (``M`` before ``N``).
    When ``m`` is given only that azimuthal order is returned.
    """
    out = []
    for l in range(1, l_max + 1):
        ms = range(-l, l + 1) if m is None else ([m] if abs(m) <= l else [])
        for mm in ms:
            for p in ("M", "N"):
                out.append(PartialWaveIndex(p, l, mm))
    return out


def bessel_i(l, z, derivative=False):
    """Modified spherical Bessel function of the first kind, ``i_l(z)``."""
    return special.spherical_in(l, z, derivative=derivative)


def bessel_k(l, z, derivative=False):
    """Modified spherical Bessel function of the third kind.

    ``k_l(z) = sqrt(pi / (2 z)) K_{l+1/2}(z)``; for example
    ``k_0(z) = (pi / (2 z)) exp(-z)``.
    """
    return special.spherical_kn(l, z, derivative=derivative)


def radial(kind, l, z, derivative=False):
    """Radial function of a regular or outgoing wave."""
    if kind == REGULAR:
        return bessel_i(l, z, derivative)
    if kind == OUTGOING:
        return bessel_k(l, z, derivative)
    raise ValueError(f"unknown wave kind {kind!r}")


def _spherical_coords(x):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    theta = np.arccos(np.clip(x[..., 2] / np.where(r > 0, r, 1.0), -1.0, 1.0))
    phi = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2 * np.pi)
    return r, theta, phi


def _ylm(l, m, theta, phi):
    if abs(m) > l:
        return np.zeros(np.shape(theta), dtype=complex)
    return special.sph_harm_y(l, m, theta, phi)


def vector_harmonic_X(l, m, theta, phi):
    """Cartesian components of ``X_lm = L Y_lm / sqrt(l (l + 1))``.

    ``L = -i x cross grad`` is the orbital angular-momentum operator.

    Returns
    -------
    ndarray, shape (..., 3), complex
    """
    a = np.sqrt((l - m) * (l + m + 1.0))
    b = np.sqrt((l + m) * (l - m + 1.0))
    yp = a * _ylm(l, m + 1, theta, phi)
    ym = b * _ylm(l, m - 1, theta, phi)
    lx = 0.5 * (yp + ym)
    ly = -0.5j * (yp - ym)
    lz = m * _ylm(l, m, theta, phi)
    return np.stack([lx, ly, lz], axis=-1) / np.sqrt(l * (l + 1.0))


def electric_wave(idx, kind, x, kappa):
    """Electric partial wave ``Phi^E`` at points ``x``.

    Parameters
    ----------
    idx : PartialWaveIndex
    kind : {"reg", "out"}
    x : array_like, shape (..., 3)
        Points relative to the expansion centre; nonzero.
    kappa : float
        Positive wavenumber.

    Returns
    -------
    ndarray, shape (..., 3), complex
    """
    if kappa <= 0:
        raise ValueError("partial waves require kappa > 0")
    x = np.asarray(x, dtype=float)
    r, theta, phi = _spherical_coords(x)
    if np.any(r == 0):
        raise ValueError("partial waves are evaluated away from the origin")
    u = kappa * r
    l, m = idx.l, idx.m
    z = radial(kind, l, u)
    X = vector_harmonic_X(l, m, theta, phi)
    if idx.p == "M":
        return -1j * z[..., None] * X
    rhat = x / r[..., None]
    dz = radial(kind, l, u, derivative=True)
    y = _ylm(l, m, theta, phi)
    radial_part = 1j * np.sqrt(l * (l + 1.0)) * (z / u) * y
    tangential = ((z + u * dz) / u)[..., None] * np.cross(rhat, X)
    return radial_part[..., None] * rhat + tangential


def wave(field, idx, kind, x, kappa):
    """Electric (``field="E"``) or magnetic (``field="H"``) partial wave."""
    if field == "E":
        return electric_wave(idx, kind, x, kappa)
    if field == "H":
        partner = PartialWaveIndex("N" if idx.p == "M" else "M", idx.l, idx.m)
        return 1j * electric_wave(partner, kind, x, kappa)
    raise ValueError(f"field must be 'E' or 'H', got {field!r}")


def spherical_wave(idx, kind, x, kappa, field="E"):
    """Evaluate a single partial wave; thin alias of :func:`wave`."""
    return wave(field, idx, kind, x, kappa)
