"""Shared geometries and cached solves for the test-suite."""

from functools import lru_cache

import numpy as np
import pytest

from casimir_surface.bem import make_plate_mesh, make_sphere_mesh
from casimir_surface.bem.energy import central_energy_density, surface_energy_term
from casimir_surface.materials import MaterialModel, MediumAssignment

EPS2 = MediumAssignment(MaterialModel.vacuum(), [MaterialModel.constant(2.0)])
EPS3 = MediumAssignment(MaterialModel.vacuum(), [MaterialModel.constant(3.0)])


def sphere_pair(refinement, d=4.0, radius=1.0):
    a = make_sphere_mesh(radius, refinement, material_index=0)
    b = make_sphere_mesh(radius, refinement, center=(0.0, 0.0, d), material_index=0)
    return [a, b]


def plate_pair(refinement, H=1.0, side=8.0, thickness=0.5):
    z = 0.5 * (H + thickness)
    a = make_plate_mesh(side, thickness, refinement, center=(0.0, 0.0, -z), material_index=0)
    b = make_plate_mesh(side, thickness, refinement, center=(0.0, 0.0, z), material_index=0)
    return [a, b]


@lru_cache(maxsize=None)
def sphere_pair_term(refinement, kappa=1.0, d=4.0):
    return surface_energy_term(sphere_pair(refinement, d), EPS2, kappa)


@lru_cache(maxsize=None)
def plate_density(refinement, kappa=1.0, H=1.0):
    return central_energy_density(plate_pair(refinement, H), EPS3, kappa, half_width=2.0)


@pytest.fixture
def eps2():
    return EPS2


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_CRITERIA = {}


def record_criterion(label, ok, detail):
    _CRITERIA[label] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s.split()[0])):
        ok, detail = _CRITERIA[label]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
