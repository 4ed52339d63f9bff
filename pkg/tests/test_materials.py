import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_surface.materials import (
    MaterialKind,
    MaterialModel,
    MediumAssignment,
    StaticLimitError,
    permeability,
    permittivity,
)

MODELS = [
    MaterialModel.vacuum(),
    MaterialModel.constant(2.5, 1.3),
    MaterialModel.drude(np.sqrt(2.0), 0.1),
    MaterialModel.plasma(3.0, mu=1.2),
]


def test_examples():
    assert permittivity(MaterialModel.vacuum(), 3.7) == 1.0
    assert permittivity(MaterialModel.constant(2.5), 0.1) == 2.5
    drude = MaterialModel.from_dict({"kind": "Drude", "params": {"omega_p_sq": 2.0, "gamma": 0.1}})
    assert permittivity(drude, 1.0) == pytest.approx(1 + 2 / 1.1, rel=1e-14)
    assert permeability(MaterialModel.vacuum(), 12.0) == 1.0
    assert permeability(MaterialModel.constant(1.0, 1.3), 2.0) == 1.3
    assert permeability(drude, 5.0) == 1.0


def test_static_limit():
    drude = MaterialModel.drude(1.0, 0.1)
    with pytest.raises(StaticLimitError):
        permittivity(drude, 0.0)
    assert permittivity(drude, 0.0, static_limit=True) == np.inf
    assert permittivity(MaterialModel.constant(4.0), 0.0) == 4.0


def test_invalid_parameters():
    with pytest.raises(ValueError):
        MaterialModel.constant(0.5)
    with pytest.raises(ValueError):
        MaterialModel(MaterialKind.DRUDE, omega_p=-1.0)
    with pytest.raises(ValueError):
        permittivity(MaterialModel.vacuum(), -1.0)
    with pytest.raises(ValueError):
        MediumAssignment(MaterialModel.vacuum(), [])


def test_dict_round_trip():
    for m in MODELS:
        assert MaterialModel.from_dict(m.to_dict()) == m


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e3))
def test_physical_range(xi):
    for m in MODELS:
        e, u = permittivity(m, xi), permeability(m, xi)
        assert np.isfinite(e) and e >= 1.0
        assert np.isfinite(u) and u > 0.0


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-4, max_value=1e3), st.floats(min_value=1e-4, max_value=1e3))
def test_dispersive_models_nonincreasing(a, b):
    lo, hi = min(a, b), max(a, b)
    for m in MODELS[2:]:
        assert permittivity(m, lo) >= permittivity(m, hi)
