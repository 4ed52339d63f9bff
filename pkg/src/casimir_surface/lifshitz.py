"""Two half-spaces across a gap: the Lifshitz free energy per unit area.

Medium 1 fills ``z <= 0``, medium 2 fills ``z >= H`` and medium 0 the gap.
At imaginary frequency ``kappa`` and in-plane wavevector ``k`` the modes of
each medium decay with ``p_r = sqrt(eps_r mu_r kappa^2 + k^2)``.  Both the
surface (Lagrange) kernel and the doubled Hamiltonian kernel reduce to
small matrices per ``k`` whose determinant ratios give

    log[(1 - rE1 rE2 e^{-2 p0 H}) (1 - rM1 rM2 e^{-2 p0 H})].
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .materials import MaterialModel, permeability, permittivity
from .matsubara import ThermalSpec, weighted_sum

GAUSS_POINTS = 64
# panel edges in t - t0 with t = p0 H; the integrand carries exp(-2 t)
PANEL_EDGES = (0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0)


@dataclass(frozen=True)
class SlabConfig:
    """Gap width, the three media and the thermal mode."""

    H: float
    medium0: MaterialModel = field(default_factory=MaterialModel.vacuum)
    medium1: MaterialModel = field(default_factory=MaterialModel.vacuum)
    medium2: MaterialModel = field(default_factory=MaterialModel.vacuum)
    thermal: ThermalSpec = field(default_factory=ThermalSpec.zero)

    def __post_init__(self):
        if not self.H > 0:
            raise ValueError("the gap H must be positive")

    def with_gap(self, H):
        return SlabConfig(H, self.medium0, self.medium1, self.medium2, self.thermal)

    def responses(self, kappa):
        """``(eps, mu)`` arrays of media 0, 1, 2 at ``kappa`` (static limits at 0)."""
        static = kappa == 0
        media = (self.medium0, self.medium1, self.medium2)
        eps = np.array([permittivity(m, kappa, static_limit=static) for m in media])
        mu = np.array([permeability(m, kappa) for m in media])
        return eps, mu


@dataclass(frozen=True)
class PlanarMomenta:
    """In-plane wavenumber, frequency and decay constants of the three media."""

    k_par: float
    kappa: float
    p0: float
    p1: float
    p2: float

    @classmethod
    def build(cls, k_par, kappa, eps, mu):
        p = [_decay(k_par, kappa, e, m) for e, m in zip(eps, mu)]
        return cls(float(k_par), float(kappa), *p)

    def p(self, r):
        return (self.p0, self.p1, self.p2)[r]


def _decay(k, kappa, eps, mu):
    if kappa == 0:
        return float(k)
    if np.isinf(eps) or np.isinf(mu):
        return np.inf
    return np.sqrt(eps * mu * kappa * kappa + k * k)


def _ratio(c0, pr, cr, p0):
    # (c0 p_r - c_r p_0) / (c0 p_r + c_r p_0), with the limits of divergent responses
    if np.isinf(cr):
        return -1.0
    if np.isinf(pr):
        return 1.0
    return (c0 * pr - cr * p0) / (c0 * pr + cr * p0)


def reflection_factors(m, eps0, mu0, eps_r, mu_r):
    """Reflection factors ``(rE, rM)`` of a half-space with response ``(eps_r, mu_r)``.

    Parameters
    ----------
    m : PlanarMomenta
        Supplies ``k_par`` and ``kappa``; ``p_r`` is recomputed from them.
    eps0, mu0 : float
        Gap medium.
    eps_r, mu_r : float
        Half-space; ``eps_r = inf`` stands for the static limit of a
        conductor.

    Returns
    -------
    tuple of float
        ``rE = (eps0 p_r - eps_r p0)/(eps0 p_r + eps_r p0)`` and ``rM``
        with ``mu`` in place of ``eps``.
    """
    p0 = _decay(m.k_par, m.kappa, eps0, mu0)
    if m.kappa == 0:
        # p_r -> k for finite responses; only the response ratio survives
        return _ratio(eps0, 1.0, eps_r, 1.0), _ratio(mu0, 1.0, mu_r, 1.0)
    pr = _decay(m.k_par, m.kappa, eps_r, mu_r)
    return _ratio(eps0, pr, eps_r, p0), _ratio(mu0, pr, mu_r, p0)


def lagrange_matrix(m, cfg):
    """``M M_inf^-1`` of the surface kernel at one ``(kappa, k)``.

    Rows and columns are ordered (body 1: M, N; body 2: M, N).  For finite
    responses the entries are the printed ratios; when a response diverges
    in the static limit the equivalent balanced form with off-diagonal
    entries ``r e^{-p0 H}`` is returned (same determinant).

    Returns
    -------
    ndarray, shape (4, 4)
    """
    eps, mu = cfg.responses(m.kappa)
    x = np.exp(-m.p0 * cfg.H)
    out = np.eye(4)
    finite = np.all(np.isfinite(eps)) and np.all(np.isfinite(mu))
    if finite:
        p = np.array([m.p0, m.p1, m.p2]) if m.kappa > 0 else np.ones(3)
        out[0, 2] = mu[2] / mu[1] * (mu[0] * p[1] - mu[1] * p[0]) / (mu[0] * p[2] + mu[2] * p[0]) * x
        out[1, 3] = (eps[0] * p[1] - eps[1] * p[0]) / (eps[0] * p[2] + eps[2] * p[0]) * x
        out[2, 0] = mu[1] / mu[2] * (mu[0] * p[2] - mu[2] * p[0]) / (mu[0] * p[1] + mu[1] * p[0]) * x
        out[3, 1] = (eps[0] * p[2] - eps[2] * p[0]) / (eps[0] * p[1] + eps[1] * p[0]) * x
    else:
        rE1, rM1 = reflection_factors(m, eps[0], mu[0], eps[1], mu[1])
        rE2, rM2 = reflection_factors(m, eps[0], mu[0], eps[2], mu[2])
        out[0, 2], out[2, 0] = rM1 * x, rM2 * x
        out[1, 3], out[3, 1] = rE1 * x, rE2 * x
    return out


def _L_block(qx, qy, kappa, eps, mu, sign):
    p = np.sqrt(eps * mu * kappa**2 + qx**2 + qy**2)
    a = eps * mu * kappa**2
    B = np.array(
        [
            [qy**2 - p**2, -qx * qy, 0.0, -sign * p],
            [-qx * qy, qx**2 - p**2, sign * p, 0.0],
            [0.0, -sign * p, 1 + qx**2 / a, qx * qy / a],
            [sign * p, 0.0, qx * qy / a, 1 + qy**2 / a],
        ]
    )
    return B / (2.0 * mu * p)


def _M_block(qx, qy, kappa, eps0, mu0, mu_r, mu_s, sign, coupling, H):
    p = np.sqrt(eps0 * mu0 * kappa**2 + qx**2 + qy**2)
    a = eps0 * mu0 * kappa**2
    # the same-surface block and the coupling block differ in the sign of the curl terms
    c = -sign if coupling else sign
    B = np.array(
        [
            [(qy**2 - p**2) / mu0**2, -qx * qy / mu0**2, 0.0, c * p / (mu0 * mu_s)],
            [-qx * qy / mu0**2, (qx**2 - p**2) / mu0**2, -c * p / (mu0 * mu_s), 0.0],
            [0.0, c * p / (mu0 * mu_r), (1 + qx**2 / a) / (mu_r * mu_s), qx * qy / a / (mu_r * mu_s)],
            [-c * p / (mu0 * mu_r), 0.0, qx * qy / a / (mu_r * mu_s), (1 + qy**2 / a) / (mu_r * mu_s)],
        ]
    )
    out = mu0 * B / (2.0 * p)
    return out * np.exp(-p * H) if coupling else out


def hamiltonian_matrix(m, cfg, angle=0.0, ratio=True):
    """Doubled kernel ``N`` (or ``N N_inf^-1``) at one ``(kappa, k)``.

    Unknowns per body are ``(K_x, K_y, K'_x, K'_y)``; body 1 comes first.
    The in-plane wavevector is ``k (cos angle, sin angle)``.

    Parameters
    ----------
    m : PlanarMomenta
        ``kappa > 0`` and ``k_par > 0``.
    cfg : SlabConfig
    angle : float
    ratio : bool
        Return ``N N_inf^-1`` where ``N_inf`` drops the coupling blocks;
        otherwise ``N`` itself.

    Returns
    -------
    ndarray, shape (8, 8)
    """
    if not (m.kappa > 0 and m.k_par > 0):
        raise ValueError("the Hamiltonian kernel needs kappa > 0 and k_par > 0")
    eps, mu = cfg.responses(m.kappa)
    qx, qy = m.k_par * np.cos(angle), m.k_par * np.sin(angle)
    k = m.kappa
    N11 = _L_block(qx, qy, k, eps[1], mu[1], 1.0) + _M_block(qx, qy, k, eps[0], mu[0], mu[1], mu[1], 1.0, False, cfg.H)
    N22 = _L_block(qx, qy, k, eps[2], mu[2], -1.0) + _M_block(qx, qy, k, eps[0], mu[0], mu[2], mu[2], -1.0, False, cfg.H)
    N12 = _M_block(qx, qy, k, eps[0], mu[0], mu[1], mu[2], 1.0, True, cfg.H)
    N21 = _M_block(qx, qy, k, eps[0], mu[0], mu[2], mu[1], -1.0, True, cfg.H)
    N = np.block([[N11, N12], [N21, N22]])
    if not ratio:
        return N
    N_inf = np.zeros_like(N)
    N_inf[:4, :4] = N11
    N_inf[4:, 4:] = N22
    return N @ np.linalg.inv(N_inf)


def _log_factors(t, kappa, H, eps, mu):
    # log of the Lifshitz product as a function of t = p0 H (vectorized over t)
    k2 = np.maximum((t / H) ** 2 - eps[0] * mu[0] * kappa**2, 0.0)
    # recomputed from k2 so that a medium equal to the gap gives r = 0 exactly
    p0 = np.sqrt(eps[0] * mu[0] * kappa**2 + k2)
    out = np.zeros_like(t)
    for c in (eps, mu):
        r = []
        for s in (1, 2):
            if np.isinf(c[s]):
                r.append(-np.ones_like(t))
            elif kappa == 0:
                r.append(np.full_like(t, (c[0] - c[s]) / (c[0] + c[s])))
            elif np.isinf(eps[s]) or np.isinf(mu[s]):
                r.append(np.ones_like(t))
            else:
                e_, m_ = eps[s], mu[s]
                ps = np.sqrt(e_ * m_ * kappa**2 + k2)
                r.append((c[0] * ps - c[s] * p0) / (c[0] * ps + c[s] * p0))
        out += np.log1p(-r[0] * r[1] * np.exp(-2.0 * t))
    return out


def k_integral(kappa, cfg, points=GAUSS_POINTS):
    """``int d^2k/(2 pi)^2 log det`` at one frequency.

    Substitutes ``t = p0 H`` (so ``k dk = t dt / H^2``) and integrates with
    Gauss-Legendre panels in ``t - t0``.
    """
    eps, mu = cfg.responses(kappa)
    H = cfg.H
    t0 = np.sqrt(eps[0] * mu[0]) * kappa * H
    x, w = roots_legendre(points)
    total = 0.0
    for a, b in zip(PANEL_EDGES[:-1], PANEL_EDGES[1:]):
        t = t0 + 0.5 * (b - a) * x + 0.5 * (b + a)
        total += 0.5 * (b - a) * np.sum(w * t * _log_factors(t, kappa, H, eps, mu))
    return total / (2.0 * np.pi * H * H)


@dataclass
class SlabResult:
    """Free energy per area with its per-frequency breakdown."""

    value: float
    per_frequency: list
    converged: bool
    n_terms: int


def free_energy_per_area(cfg, points=GAUSS_POINTS):
    """Lifshitz free energy per unit area.

    Parameters
    ----------
    cfg : SlabConfig
    points : int
        Gauss-Legendre points per panel of the ``k`` integral.

    Returns
    -------
    SlabResult
    """
    report = weighted_sum(lambda xi: k_integral(xi, cfg, points), cfg.thermal)
    return SlabResult(report.value, list(report.terms), report.converged, report.n_terms)


def pressure(cfg, rel_step=1e-3):
    """``-d(F/A)/dH`` by central differences with one Richardson level."""
    h = rel_step * cfg.H

    def central(step):
        plus = free_energy_per_area(cfg.with_gap(cfg.H + step)).value
        minus = free_energy_per_area(cfg.with_gap(cfg.H - step)).value
        return (plus - minus) / (2.0 * step)

    return -(4.0 * central(0.5 * h) - central(h)) / 3.0
