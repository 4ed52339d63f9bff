"""Casimir forces from the surface operators.

The force on body ``r`` at one frequency is ``Tr[K dM/dX_r]`` with
``K = -M^{-1}``.  A rigid shift of body ``r`` only changes the outer-medium
couplings between ``r`` and the other bodies, so ``dM/dX_r`` is built from
derivatives of the coupling integrals alone.  Finite differences of the
free energy give an independent check.
"""

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..matsubara import ThermalSpec, weighted_sum
from .energy import free_energy, surface_energy_term
from .mesh import MeshError
from .operators import SurfaceSystem, field_blocks
from .rwg import gradient_integrals


def _coupling_derivatives(system, r, kappa):
    """``dM/dX_r`` for the three Cartesian directions."""
    imap = system.index_map()
    eps0, mu0 = system.response(None, kappa)
    k0 = kappa * np.sqrt(eps0 * mu0)
    out = [np.zeros((imap.size, imap.size)) for _ in range(3)]
    for s in range(system.n_bodies):
        if s == r:
            continue
        grads = gradient_integrals(
            system.bases[r], system.bases[s], k0, system.options, system.near_mask(r, s), include_near=True
        )
        for e in range(3):
            out[e][imap.body(r), imap.body(s)] = field_blocks(grads[e], eps0, mu0, kappa)
            out[e][imap.body(s), imap.body(r)] = field_blocks(grads[e].transpose(), eps0, mu0, kappa)
    return out


def force_trace(bodies, media, kappa, body_index, options=None, system=None):
    """Per-frequency force ``Tr[K dM/dX_r]`` on one body.

    Parameters
    ----------
    bodies : list of BodyMesh
    media : MediumAssignment
    kappa : float
        Imaginary frequency, ``kappa > 0``.
    body_index : int
    options : QuadratureOptions, optional
    system : SurfaceSystem, optional
        Reuse an assembled system.

    Returns
    -------
    ndarray, shape (3,)
        The thermal force is ``T sum'_n`` of this vector (or the
        zero-temperature integral over ``kappa``).
    """
    s = system if system is not None else SurfaceSystem(list(bodies), media, options)
    if s.n_bodies == 1:
        return np.zeros(3)
    M = s.full_operator(kappa).data
    factor = lu_factor(M)
    return np.array([-np.trace(lu_solve(factor, dM)) for dM in _coupling_derivatives(s, body_index, kappa)])


def self_force_trace(body, media, kappa, options=None):
    """Self-block contribution ``Tr[K_rr dG_rr/dX]`` of an isolated body.

    Both arguments of the differentiated kernel lie on the same surface.
    The sum is evaluated with the same point rule on both sides and the
    near pairs left out, so the discrete operator keeps the reciprocity
    structure that makes the exact trace vanish; the result is a
    diagnostic of that structure.
    """
    s = SurfaceSystem([body if body.material_index is not None else body.with_material(0)], media, options)
    M = s.body_operator(0, kappa)
    eps0, mu0 = s.response(None, kappa)
    b = s.bases[0]
    grads = gradient_integrals(
        b, b, kappa * np.sqrt(eps0 * mu0), s.options, s.near_mask(0, 0), include_near=False
    )
    factor = lu_factor(M)
    return np.array([-np.trace(lu_solve(factor, field_blocks(g, eps0, mu0, kappa))) for g in grads])


def min_gap(bodies, body_index):
    """Smallest vertex distance between one body and all others."""
    v = bodies[body_index].vertices
    gaps = [
        np.sqrt(((v[:, None, :] - b.vertices[None, :, :]) ** 2).sum(-1)).min()
        for s, b in enumerate(bodies)
        if s != body_index
    ]
    return min(gaps) if gaps else None


def _step(bodies, body_index, h):
    if h is not None:
        return h
    gap = min_gap(bodies, body_index)
    if gap is None:
        return 1e-3 * np.ptp(bodies[body_index].vertices, axis=0).max()
    return 1e-3 * gap


def _moved(bodies, body_index, shift):
    out = list(bodies)
    out[body_index] = bodies[body_index].translated(shift)
    return out


def _richardson_derivative(energy, h):
    def central(step):
        return (energy(step) - energy(-step)) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def _unit(direction):
    d = np.asarray(direction, dtype=float)
    return d / np.linalg.norm(d)


def force_fd_term(bodies, media, kappa, body_index, direction, h=None, options=None):
    """Per-frequency force ``-d term/dX`` by central differences.

    The step defaults to ``1e-3`` times the smallest gap to the other
    bodies; one Richardson level combines steps ``h`` and ``h/2``.  The
    near-pair classification of the reference geometry is kept fixed for
    the displaced configurations.
    """
    bodies = list(bodies)
    ref = SurfaceSystem(bodies, media, options)
    if ref.n_bodies == 1:
        return 0.0
    for r in range(ref.n_bodies):
        for s in range(ref.n_bodies):
            ref.near_mask(r, s)
    u = _unit(direction)
    h = _step(bodies, body_index, h)

    def energy(step):
        moved = _moved(bodies, body_index, step * u)
        _check_gap(moved, body_index)
        return surface_energy_term(None, None, kappa, system=SurfaceSystem(moved, media, ref.options, ref.near))

    return -_richardson_derivative(energy, h)


def force_fd(bodies, media, thermal=None, body_index=0, direction=(0.0, 0.0, 1.0), h=None, options=None):
    """Force on one body along ``direction`` from differences of the free energy.

    Parameters
    ----------
    thermal : ThermalSpec, optional
        Defaults to zero temperature.

    Returns
    -------
    float
        ``-dF/dX`` along the unit vector ``direction``.
    """
    bodies = list(bodies)
    if len(bodies) == 1:
        return 0.0
    u = _unit(direction)
    h = _step(bodies, body_index, h)

    def energy(step):
        moved = _moved(bodies, body_index, step * u)
        _check_gap(moved, body_index)
        return free_energy(moved, media, thermal, options=options).total

    return -_richardson_derivative(energy, h)


def force_thermal(bodies, media, thermal=None, body_index=0, options=None, static_scale=1e-3):
    """Force vector ``T sum'_n Tr[K dM/dX_r]`` summed over frequencies.

    Returns
    -------
    ndarray, shape (3,)
    list of (xi, force vector)
    """
    from .energy import static_kappa

    thermal = thermal or ThermalSpec.zero()
    system = SurfaceSystem(list(bodies), media, options)
    k0 = static_kappa(bodies, static_scale)
    cache = {}

    def vector(xi):
        if xi not in cache:
            cache[xi] = force_trace(None, None, xi if xi > 0 else k0, body_index, system=system)
            system.clear_cache()
        return cache[xi]

    total = np.zeros(3)
    for e in range(3):
        # the frequency grid is deterministic, so later components reuse the cached solves
        total[e] = weighted_sum(lambda xi: vector(xi)[e], thermal, panel_points=8, xi_min=0.05 * k0 / static_scale).value
    return total, sorted(cache.items())


def _check_gap(bodies, body_index):
    gap = min_gap(bodies, body_index)
    if gap is not None and gap <= 0:
        raise MeshError("displaced body overlaps another body")
