"""Local isotropic response functions on the imaginary frequency axis.

Units: hbar = c = k_B = 1.  Lengths are measured in a reference length
``L_ref`` and imaginary frequencies ``xi`` in ``c / L_ref``, so the
wavenumber of a Matsubara mode is ``kappa = xi``.

The dispersion models are a choice of this package:

* ``Vacuum``: ``eps = mu = 1``.
* ``Constant``: frequency-independent ``eps`` and ``mu``.
* ``Drude``: ``eps = 1 + wp^2 / (xi (xi + gamma))``; divergent at ``xi = 0``.
* ``Plasma``: ``eps = 1 + wp^2 / xi^2``; the ``gamma = 0`` Drude model.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class MaterialKind(str, Enum):
    VACUUM = "Vacuum"
    CONSTANT = "Constant"
    DRUDE = "Drude"
    PLASMA = "Plasma"


class StaticLimitError(ValueError):
    """Raised when a model diverging at ``xi = 0`` is evaluated there."""


@dataclass(frozen=True)
class MaterialModel:
    """Dielectric and magnetic response of one homogeneous medium.

    Parameters
    ----------
    kind : MaterialKind or str
    eps : float
        Permittivity of a ``Constant`` medium.
    mu : float
        Permeability; every model except ``Vacuum`` honours it.
    omega_p : float
        Plasma frequency of ``Drude`` and ``Plasma`` media.
    gamma : float
        Relaxation rate of a ``Drude`` medium.
    """

    kind: MaterialKind = MaterialKind.VACUUM
    eps: float = 1.0
    mu: float = 1.0
    omega_p: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", MaterialKind(self.kind))
        for name in ("eps", "mu", "omega_p", "gamma"):
            if getattr(self, name) < 0:
                raise ValueError(f"material parameter {name} must be nonnegative")
        if self.kind == MaterialKind.CONSTANT and self.eps < 1:
            raise ValueError("Constant permittivity must be >= 1")
        if self.mu <= 0:
            raise ValueError("permeability must be positive")

    @classmethod
    def vacuum(cls):
        return cls(MaterialKind.VACUUM)

    @classmethod
    def constant(cls, eps=1.0, mu=1.0):
        return cls(MaterialKind.CONSTANT, eps=eps, mu=mu)

    @classmethod
    def drude(cls, omega_p, gamma, mu=1.0):
        return cls(MaterialKind.DRUDE, omega_p=omega_p, gamma=gamma, mu=mu)

    @classmethod
    def plasma(cls, omega_p, mu=1.0):
        return cls(MaterialKind.PLASMA, omega_p=omega_p, mu=mu)

    @classmethod
    def from_dict(cls, spec):
        """Build from a ``{"kind": ..., "params": {...}}`` record."""
        params = dict(spec.get("params", {}))
        if "omega_p_sq" in params:
            params["omega_p"] = float(np.sqrt(params.pop("omega_p_sq")))
        return cls(MaterialKind(spec["kind"]), **params)

    def to_dict(self):
        params = {}
        if self.kind == MaterialKind.CONSTANT:
            params["eps"] = self.eps
        if self.kind in (MaterialKind.DRUDE, MaterialKind.PLASMA):
            params["omega_p"] = self.omega_p
        if self.kind == MaterialKind.DRUDE:
            params["gamma"] = self.gamma
        if self.kind != MaterialKind.VACUUM and self.mu != 1.0:
            params["mu"] = self.mu
        return {"kind": self.kind.value, "params": params}

    @property
    def diverges_at_zero(self):
        return self.kind in (MaterialKind.DRUDE, MaterialKind.PLASMA) and self.omega_p > 0


def permittivity(model, xi, static_limit=False):
    """Permittivity ``eps(i xi)``.

    Parameters
    ----------
    model : MaterialModel
    xi : float
        Imaginary frequency, ``xi >= 0``.
    static_limit : bool
        Allow ``xi = 0`` for models that diverge there; the result is then
        ``inf`` and callers must use their explicit static-limit formulas.

    Returns
    -------
    float

    Raises
    ------
    StaticLimitError
        Drude or Plasma medium at ``xi = 0`` without ``static_limit``.
    """
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    kind = model.kind
    if kind == MaterialKind.VACUUM:
        return 1.0
    if kind == MaterialKind.CONSTANT:
        return float(model.eps)
    if xi == 0:
        if model.omega_p == 0:
            return 1.0
        if not static_limit:
            raise StaticLimitError(f"{kind.value} permittivity diverges at xi = 0")
        return np.inf
    if kind == MaterialKind.DRUDE:
        return 1.0 + model.omega_p**2 / (xi * (xi + model.gamma))
    return 1.0 + model.omega_p**2 / xi**2


def permeability(model, xi):
    """Permeability ``mu(i xi)``; frequency independent for all models."""
    if xi < 0:
        raise ValueError("xi must be nonnegative")
    if model.kind == MaterialKind.VACUUM:
        return 1.0
    return float(model.mu)


@dataclass
class MediumAssignment:
    """Outer medium plus one material per body."""

    outer: MaterialModel = field(default_factory=MaterialModel.vacuum)
    bodies: list = field(default_factory=list)

    def __post_init__(self):
        if len(self.bodies) < 1:
            raise ValueError("at least one body medium is required")

    def response(self, region, xi, static_limit=False):
        """``(eps, mu)`` of region 0 (outside) or body ``region - 1``."""
        model = self.outer if region == 0 else self.bodies[region - 1]
        return permittivity(model, xi, static_limit), permeability(model, xi)
