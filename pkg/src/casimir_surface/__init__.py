"""Casimir free energies and forces from fluctuating surface currents.

Modules
-------
materials
    Response functions on the imaginary frequency axis.
green
    Free dyadic Green function blocks of a homogeneous medium.
matsubara
    Matsubara frequencies and the thermal sum.
lifshitz
    Planar two-slab free energy (Lagrange and Hamiltonian kernels).
bem
    Boundary elements for closed meshed bodies: energies and forces.
waves
    Spherical partial waves, T-matrices, translation matrices and the
    scattering-formula energy.
"""

from .materials import MaterialModel, MediumAssignment, StaticLimitError, permeability, permittivity
from .matsubara import ThermalSpec, weighted_sum
from .green import dyadic_all, scalar_g0
from .lifshitz import SlabConfig, free_energy_per_area, pressure

__version__ = "0.1.0"

__all__ = [
    "MaterialModel",
    "MediumAssignment",
    "StaticLimitError",
    "ThermalSpec",
    "SlabConfig",
    "dyadic_all",
    "free_energy_per_area",
    "permeability",
    "permittivity",
    "pressure",
    "scalar_g0",
    "weighted_sum",
]
