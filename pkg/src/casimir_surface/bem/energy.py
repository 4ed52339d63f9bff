"""Casimir free energy from discretized surface operators.

Per imaginary frequency the interaction term is
``log det(M) - sum_r log det(M_r)``, the log-determinant of ``M`` relative
to its block diagonal.  For two bodies the same number is
``log det(1 - M_1^{-1} G_12 M_2^{-1} G_21)``, which only needs the body
factorizations and the coupling blocks.  The Hamiltonian representation
repeats both routes with the doubled kernel ``N``.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from ..matsubara import ThermalSpec, weighted_sum
from ..materials import StaticLimitError
from .operators import SurfaceSystem

PIVOT_TOLERANCE = 1e-14


class ConditioningError(RuntimeError):
    """A kernel is numerically singular or its determinant ratio is not positive."""


def lu_logdet(A, what="matrix"):
    """LU factorization of ``A`` and ``log |det A|`` with its sign.

    Raises
    ------
    ConditioningError
        If a pivot falls below ``PIVOT_TOLERANCE * max|A|``.
    """
    lu, piv = lu_factor(A, check_finite=True)
    d = np.diag(lu)
    scale = np.abs(A).max()
    small = np.abs(d) <= PIVOT_TOLERANCE * scale
    if small.any():
        raise ConditioningError(
            f"{what} is numerically singular: pivot {np.abs(d).min():.3e} at row {int(np.argmax(small))}"
            f" against scale {scale:.3e}"
        )
    sign = np.prod(np.sign(d)) * (-1.0) ** np.count_nonzero(piv != np.arange(len(piv)))
    return (lu, piv), float(sign), float(np.sum(np.log(np.abs(d))))


def _positive_logdet(A, what):
    _, sign, value = lu_logdet(A, what)
    if sign <= 0:
        raise ConditioningError(f"{what} has non-positive determinant; refine the mesh or check the inputs")
    return value


def _two_body(D1, D2, C12, C21):
    f1 = lu_logdet(D1, "body 1 operator")[0]
    f2 = lu_logdet(D2, "body 2 operator")[0] if D2 is not D1 else f1
    X = lu_solve(f2, C21)
    Y = lu_solve(f1, C12 @ X)
    return _positive_logdet(np.eye(len(Y)) - Y, "1 - K")


def _ratio(full, imap):
    # M_inf^-1 M formed block row by block row; its diagonal blocks are 1
    n = len(imap.sizes)
    R = np.eye(len(full))
    for r in range(n):
        rows = imap.body(r)
        factor = lu_logdet(full[rows, rows], f"body {r} operator")[0]
        for s in range(n):
            if s != r:
                cols = imap.body(s)
                R[rows, cols] = lu_solve(factor, full[rows, cols])
    return _positive_logdet(R, "M M_inf^-1")


def _term(system, kappa, method, diagonal, coupling, full):
    n = system.n_bodies
    if n == 1:
        return 0.0
    if method == "auto":
        method = "two-body" if n == 2 else "ratio"
    if method == "two-body":
        if n != 2:
            raise ValueError("the two-body route needs exactly two bodies")
        D1 = diagonal(0, kappa)
        same = _same_operator(system)
        D2 = D1 if same else diagonal(1, kappa)
        return _two_body(D1, D2, coupling(0, 1, kappa), coupling(1, 0, kappa))
    if method == "ratio":
        K = full(kappa)
        return _ratio(K.data, K.rows)
    raise ValueError(f"unknown method {method!r}")


def _same_operator(system):
    from .operators import _shape_key

    a, b = system.bodies
    return _shape_key(a) == _shape_key(b) and system.material_of(0) == system.material_of(1)


def _system(bodies, media, options, system):
    return system if system is not None else SurfaceSystem(list(bodies), media, options)


def surface_energy_term(bodies, media, kappa, method="auto", options=None, system=None):
    """Interaction log-determinant of the surface operator at one frequency.

    Parameters
    ----------
    bodies : list of BodyMesh
    media : MediumAssignment
    kappa : float
        Imaginary frequency ``xi`` (with ``c = 1``), ``kappa > 0``.
    method : {"auto", "two-body", "ratio"}
        ``"two-body"`` evaluates ``log det(1 - M1^-1 G12 M2^-1 G21)``;
        ``"ratio"`` evaluates ``log det(M_inf^-1 M)`` where ``M_inf`` is
        the block diagonal of ``M``.
    options : QuadratureOptions, optional
    system : SurfaceSystem, optional
        Reuse cached integrals of an existing system (``bodies`` and
        ``media`` are then ignored).

    Returns
    -------
    float
    """
    s = _system(bodies, media, options, system)
    return _term(s, kappa, method, s.body_operator, s.coupling, s.full_operator)


def hamiltonian_energy_term(bodies, media, kappa, method="auto", options=None, system=None):
    """Interaction log-determinant ``log det(N N_inf^-1)`` of the doubled kernel."""
    s = _system(bodies, media, options, system)
    return _term(s, kappa, method, s.hamiltonian_diagonal, s.hamiltonian_coupling, s.full_hamiltonian)


@dataclass
class EnergyResult:
    """Free energy with its per-frequency breakdown.

    Attributes
    ----------
    total : float
        Weighted sum of the terms (free energy in units of the inverse
        reference length).
    per_frequency : list of (xi, term)
    convergence : SumReport
    """

    total: float
    per_frequency: list = field(default_factory=list)
    convergence: object = None


def static_kappa(bodies, scale=1e-3):
    """Small frequency standing in for the static term of the BEM sum."""
    size = max(np.ptp(b.vertices, axis=0).max() for b in bodies)
    return scale / size


def free_energy(
    bodies, media, thermal=None, representation="surface", options=None, static_scale=1e-3, panel_points=8
):
    """Casimir free energy summed over imaginary frequencies.

    The surface operators are singular at ``kappa = 0``; the static term is
    evaluated at ``static_kappa(bodies, static_scale)``.  Media whose
    permittivity diverges at zero frequency (Drude, plasma) have no such
    stand-in and are rejected for finite temperature.

    Parameters
    ----------
    thermal : ThermalSpec, optional
        Defaults to zero temperature.
    representation : {"surface", "hamiltonian"}
    panel_points : int
        Gauss-Legendre points per panel of the zero-temperature integral;
        every point is a full BEM solve.
    """
    thermal = thermal or ThermalSpec.zero()
    system = SurfaceSystem(list(bodies), media, options)
    fn = {"surface": surface_energy_term, "hamiltonian": hamiltonian_energy_term}[representation]
    k0 = static_kappa(bodies, static_scale)

    def term(xi):
        if xi == 0.0:
            if any(system.material_of(r).diverges_at_zero for r in range(system.n_bodies)) or media.outer.diverges_at_zero:
                raise StaticLimitError("static term of Drude or plasma media is not available in the surface solver")
            xi = k0
        value = fn(None, None, xi, system=system)
        system.clear_cache()
        return value

    report = weighted_sum(term, thermal, panel_points=panel_points, xi_min=0.05 * k0 / static_scale)
    return EnergyResult(report.value, list(report.terms), report)


def _window_weights(points, center, half_width):
    # 1 inside, 1/2 on the boundary, 0 outside, per in-plane axis
    w = np.ones(len(points))
    for axis in (0, 1):
        u = np.abs(points[:, axis] - center[axis])
        tol = 1e-9 * half_width
        w *= np.where(u < half_width - tol, 1.0, np.where(u <= half_width + tol, 0.5, 0.0))
    return w


def central_energy_density(bodies, media, kappa, half_width, options=None, system=None):
    """Interaction term per unit area near the centre of two stacked plates.

    The two-body term is ``tr log(1 - A)`` with
    ``A = M_1^{-1} G_12 M_2^{-1} G_21`` on the unknowns of body 0.  The
    diagonal entries of ``log(1 - A)`` attribute the term to the RWG edges;
    summing them over the edges whose midpoints lie in the square
    ``|x - cx|, |y - cy| < half_width`` about the centre of body 0 and
    dividing by the square's area gives a density free of plate-edge
    effects.  The plates are assumed to lie in planes normal to z.

    Returns
    -------
    float
    """
    from scipy.linalg import logm

    s = _system(bodies, media, options, system)
    if s.n_bodies != 2:
        raise ValueError("the central density needs exactly two bodies")
    f1 = lu_logdet(s.body_operator(0, kappa), "body 1 operator")[0]
    f2 = f1 if _same_operator(s) else lu_logdet(s.body_operator(1, kappa), "body 2 operator")[0]
    A = lu_solve(f1, s.coupling(0, 1, kappa) @ lu_solve(f2, s.coupling(1, 0, kappa)))
    L, _ = logm(np.eye(len(A)) - A, disp=False)
    diag = np.real(np.diag(L))
    n = s.bases[0].n
    per_edge = diag[:n] + diag[n:]
    w = _window_weights(s.bases[0].edge_midpoints(), s.bodies[0].center, half_width)
    return float(w @ per_edge / (2.0 * half_width) ** 2)


def richardson_extrapolate(h, values):
    """Value at ``h = 0`` of the polynomial in ``h`` through ``(h_i, values_i)``."""
    h = np.asarray(h, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(h) != len(values) or len(h) < 2:
        raise ValueError("need at least two (h, value) pairs")
    V = np.vander(h, len(h))
    return float(np.linalg.solve(V, values)[-1])
