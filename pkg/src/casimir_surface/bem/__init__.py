"""Boundary-element discretization of the surface operators."""

from .energy import (
    ConditioningError,
    EnergyResult,
    central_energy_density,
    free_energy,
    hamiltonian_energy_term,
    richardson_extrapolate,
    surface_energy_term,
)
from .force import force_fd, force_thermal, force_trace, self_force_trace
from .mesh import (
    BodyMesh,
    MeshError,
    make_box_mesh,
    make_plate_mesh,
    make_sphere_mesh,
    read_panel_file,
    write_panel_file,
)
from .operators import AssemblyError, IndexMap, KernelMatrix, SurfaceSystem, assemble_Grs, assemble_Mr
from .rwg import QuadratureOptions

__all__ = [
    "AssemblyError",
    "BodyMesh",
    "ConditioningError",
    "EnergyResult",
    "IndexMap",
    "KernelMatrix",
    "MeshError",
    "QuadratureOptions",
    "SurfaceSystem",
    "assemble_Grs",
    "assemble_Mr",
    "central_energy_density",
    "force_fd",
    "force_thermal",
    "force_trace",
    "free_energy",
    "hamiltonian_energy_term",
    "make_box_mesh",
    "make_plate_mesh",
    "make_sphere_mesh",
    "read_panel_file",
    "richardson_extrapolate",
    "self_force_trace",
    "surface_energy_term",
    "write_panel_file",
]
