"""Scattering (T) matrices of single bodies.

For an incident regular wave ``Phi_b`` the field scattered by a body is
``sum_a T_ab Phi_a,out`` outside its circumscribed sphere.  With the
surface currents ``J = K Phi_b`` and ``K = -M^{-1}``,

    T_ab = lam (-1)^{m_a} sum_{fields} (-1)^{s} <Phi^s_{p_a l_a, -m_a} | K | Phi_b>

where ``<.|.>`` is the bilinear (unconjugated) pairing of tested fields
and ``lam`` is :func:`expansion_constant`.
"""

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..bem.operators import SurfaceSystem
from ..materials import MaterialModel, MediumAssignment, permeability, permittivity
from .expansion import expansion_constant
from .functions import REGULAR, PartialWaveIndex, bessel_i, bessel_k, wave, wave_indices


@dataclass
class TMatrix:
    """T-matrix over a list of partial-wave labels.

    Attributes
    ----------
    data : ndarray, shape (n, n)
    indices : list of PartialWaveIndex
    kappa : float
    body : int or None
    """

    data: np.ndarray
    indices: list
    kappa: float
    body: int = None

    @property
    def l_max(self):
        return max(i.l for i in self.indices)

    def position(self, idx):
        return self.indices.index(idx)

    def entry(self, a, b):
        return self.data[self.position(a), self.position(b)]

    def m_block(self, m, l_max=None):
        """Sub-matrix of the labels with azimuthal order ``m`` (and ``l <= l_max``)."""
        sel = [k for k, i in enumerate(self.indices) if i.m == m and (l_max is None or i.l <= l_max)]
        return self.data[np.ix_(sel, sel)], [self.indices[k] for k in sel]

    def truncated(self, l_max):
        sel = [k for k, i in enumerate(self.indices) if i.l <= l_max]
        return TMatrix(self.data[np.ix_(sel, sel)], [self.indices[k] for k in sel], self.kappa, self.body)


def _require_vacuum_outside(media, kappa):
    eps0 = permittivity(media.outer, kappa)
    mu0 = permeability(media.outer, kappa)
    if eps0 != 1.0 or mu0 != 1.0:
        raise ValueError("partial waves are defined for a vacuum outer medium")


def _tested_waves(basis, indices, kappa, center, sign_h, degree=7):
    cols = []
    for idx in indices:
        parts = []
        for field, s in (("E", 1.0), ("H", sign_h)):
            parts.append(s * basis.test_field(lambda X: wave(field, idx, REGULAR, X - center, kappa), degree))
        cols.append(np.concatenate(parts))
    return np.stack(cols, axis=1)


def _raw_tmatrix(system, kappa, indices, center):
    basis = system.bases[0]
    right = _tested_waves(basis, indices, kappa, center, 1.0)
    flipped = [PartialWaveIndex(i.p, i.l, -i.m) for i in indices]
    left = _tested_waves(basis, flipped, kappa, center, -1.0)
    M = system.body_operator(0, kappa)
    X = lu_solve(lu_factor(M), right)
    phase = np.array([(-1.0) ** i.m for i in indices])
    return expansion_constant(kappa) * phase[:, None] * (left.T @ (-X))


def tmatrix_from_surface(body, media, kappa, l_max, options=None, subtract_background=True):
    """T-matrix of a meshed body from its surface operator.

    Parameters
    ----------
    body : BodyMesh
        Closed mesh; waves are expanded about ``body.center``.
    media : MediumAssignment
        Outer medium (vacuum) and the body medium (``bodies[0]`` unless
        the mesh carries a ``material_index``).
    kappa : float
    l_max : int
    options : QuadratureOptions, optional
    subtract_background : bool
        Subtract the T-matrix computed with the outer medium filling the
        body.  That matrix vanishes in the continuum; on a mesh it removes
        the discretization error the two solves have in common.

    Returns
    -------
    TMatrix
    """
    _require_vacuum_outside(media, kappa)
    if body.material_index is None:
        body = body.with_material(0)
    indices = wave_indices(l_max)
    system = SurfaceSystem([body], media, options)
    T = _raw_tmatrix(system, kappa, indices, body.center)
    if subtract_background:
        blank = list(media.bodies)
        blank[body.material_index] = media.outer
        empty = SurfaceSystem([body], MediumAssignment(media.outer, blank), options)
        T = T - _raw_tmatrix(empty, kappa, indices, body.center)
    return TMatrix(T, indices, kappa)


def mie_coefficients(p, l, kappa, radius, eps, mu=1.0):
    """Analytic T-matrix element of a homogeneous sphere in vacuum."""
    z0 = kappa * radius
    z1 = kappa * np.sqrt(eps * mu) * radius
    i0, di0 = bessel_i(l, z0), bessel_i(l, z0, True)
    k0, dk0 = bessel_k(l, z0), bessel_k(l, z0, True)
    i1, di1 = bessel_i(l, z1), bessel_i(l, z1, True)
    contrast = mu if p == "M" else eps
    ratio = (i1 + z1 * di1) / (i1 * contrast)
    return -(i0 + z0 * di0 - ratio * i0) / (k0 + z0 * dk0 - ratio * k0)


def sphere_tmatrix(radius, material, kappa, l_max):
    """Diagonal T-matrix of a homogeneous sphere from boundary matching.

    Parameters
    ----------
    radius : float
    material : MaterialModel
    """
    eps = permittivity(material, kappa)
    mu = permeability(material, kappa)
    indices = wave_indices(l_max)
    diag = [mie_coefficients(i.p, i.l, kappa, radius, eps, mu) for i in indices]
    return TMatrix(np.diag(np.asarray(diag, dtype=complex)), indices, kappa)
