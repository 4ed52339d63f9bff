"""Matsubara frequencies and the primed thermal sum.

With ``k_B = hbar = 1`` the free energy is ``T sum'_n f(xi_n)`` with
``xi_n = 2 pi n T`` and the ``n = 0`` term weighted by one half.  At zero
temperature the sum becomes ``(1 / 2 pi) int_0^inf f(xi) d xi``.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import roots_legendre


class ThermalMode(str, Enum):
    FINITE_T = "FiniteT"
    ZERO_T = "ZeroT"


@dataclass(frozen=True)
class ThermalSpec:
    """Temperature and truncation controls of the frequency sum.

    Parameters
    ----------
    temperature : float
        ``k_B T`` in units of ``hbar c / L_ref``; must be 0 in ``ZeroT`` mode.
    n_max : int
        Largest Matsubara index evaluated.
    rel_tol : float
        Relative stopping tolerance, in ``(0, 1)``.
    mode : ThermalMode or str
    """

    temperature: float = 0.0
    n_max: int = 2000
    rel_tol: float = 1e-8
    mode: ThermalMode = ThermalMode.ZERO_T

    def __post_init__(self):
        object.__setattr__(self, "mode", ThermalMode(self.mode))
        if not 0 < self.rel_tol < 1:
            raise ValueError("rel_tol must lie in (0, 1)")
        if self.n_max < 1:
            raise ValueError("n_max must be positive")
        if self.temperature < 0:
            raise ValueError("temperature must be nonnegative")
        if self.mode == ThermalMode.ZERO_T and self.temperature != 0:
            raise ValueError("ZeroT mode requires temperature = 0")
        if self.mode == ThermalMode.FINITE_T and self.temperature <= 0:
            raise ValueError("FiniteT mode requires temperature > 0")

    @classmethod
    def finite(cls, temperature, n_max=2000, rel_tol=1e-8):
        return cls(temperature, n_max, rel_tol, ThermalMode.FINITE_T)

    @classmethod
    def zero(cls, rel_tol=1e-8):
        return cls(0.0, 2000, rel_tol, ThermalMode.ZERO_T)

    @classmethod
    def from_dict(cls, spec):
        return cls(**spec)

    def to_dict(self):
        return {"temperature": self.temperature, "n_max": self.n_max, "rel_tol": self.rel_tol, "mode": self.mode.value}


@dataclass
class SumReport:
    """Outcome of a frequency sum or integral."""

    value: float
    converged: bool
    n_terms: int
    terms: list = field(default_factory=list)

    @property
    def flag(self):
        return "converged" if self.converged else "truncated"


def frequencies(spec, n_terms=None):
    """Matsubara frequencies and weights ``[(xi_n, w_n), ...]``.

    ``w_0 = T / 2`` and ``w_n = T`` otherwise.  Returns ``n_terms`` entries
    (default ``spec.n_max + 1``).
    """
    if spec.mode != ThermalMode.FINITE_T:
        raise ValueError("Matsubara frequencies need FiniteT mode; use weighted_sum for ZeroT")
    T = spec.temperature
    count = spec.n_max + 1 if n_terms is None else n_terms
    return [(2.0 * np.pi * n * T, T / 2.0 if n == 0 else T) for n in range(count)]


def weighted_sum(term, spec, consecutive=3, panel_points=32, xi_min=1e-6):
    """Thermal sum ``T sum'_n term(xi_n)`` or its zero-temperature integral.

    Parameters
    ----------
    term : callable
        ``xi -> float``; must decay to zero for large ``xi``.
    spec : ThermalSpec
    consecutive : int
        Number of consecutive negligible terms that stop the sum.  A term
        is negligible when it, or the geometric tail extrapolated from it
        and its predecessor if larger, is below ``rel_tol`` times the
        running total.
    panel_points : int
        Gauss-Legendre points per panel of the zero-temperature integral.
    xi_min : float
        Width of the first panel of the zero-temperature integral; later
        panels double in width.

    Returns
    -------
    SumReport
        ``terms`` lists ``(xi, term(xi))`` for every evaluated frequency.
    """
    if spec.mode == ThermalMode.ZERO_T:
        return _zero_temperature_integral(term, spec, panel_points, xi_min)
    T = spec.temperature
    total, small, terms, previous = 0.0, 0, [], None
    for n in range(spec.n_max + 1):
        xi = 2.0 * np.pi * n * T
        value = float(term(xi))
        terms.append((xi, value))
        total += (0.5 if n == 0 else 1.0) * T * value
        if _tail(T * value, previous) <= spec.rel_tol * abs(total):
            small += 1
            if small >= consecutive:
                return SumReport(total, True, n + 1, terms)
        else:
            small = 0
        previous = T * value
    return SumReport(total, False, spec.n_max + 1, terms)


def _tail(current, previous):
    # geometric estimate of the remaining terms, never below the current one;
    # at low temperature many terms follow and the bare term size would stop too early
    if current == 0.0:
        return 0.0
    if previous is None or previous == 0.0:
        return abs(current)
    r = abs(current / previous)
    if r >= 1.0:
        return np.inf
    return abs(current) * max(1.0, r / (1.0 - r))


def _panel(term, a, b, terms, rule):
    nodes, weights = rule
    x = 0.5 * (b - a) * nodes + 0.5 * (b + a)
    vals = np.array([float(term(v)) for v in x])
    terms.extend(zip(x.tolist(), vals.tolist()))
    return 0.5 * (b - a) * float(weights @ vals)


def _zero_temperature_integral(term, spec, panel_points, xi_min=1e-6, growth=2.0, max_panels=200):
    # Gauss-Legendre on log-spaced panels [0, xi_min], [xi_min, 2 xi_min], ...
    rule = roots_legendre(panel_points)
    terms = []
    total = _panel(term, 0.0, xi_min, terms, rule)
    a = xi_min
    small = 0
    for _ in range(max_panels):
        b = a * growth
        piece = _panel(term, a, b, terms, rule)
        total += piece
        a = b
        if a > 1.0 and abs(piece) <= spec.rel_tol * abs(total):
            small += 1
            if small >= 3:
                return SumReport(total / (2.0 * np.pi), True, len(terms), terms)
        else:
            small = 0
    return SumReport(total / (2.0 * np.pi), False, len(terms), terms)
