import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from casimir_surface.matsubara import ThermalMode, ThermalSpec, frequencies, weighted_sum


def test_frequencies():
    f = frequencies(ThermalSpec.finite(1.0, n_max=2))
    assert f == [(0.0, 0.5), (2 * np.pi, 1.0), (4 * np.pi, 1.0)]
    assert frequencies(ThermalSpec.finite(0.5), n_terms=2)[1][0] == pytest.approx(np.pi)
    T, N = 0.3, 40
    assert sum(w for _, w in frequencies(ThermalSpec.finite(T, n_max=N))) == pytest.approx(T * (N + 0.5))
    with pytest.raises(ValueError):
        frequencies(ThermalSpec.zero())


def test_spec_validation():
    with pytest.raises(ValueError):
        ThermalSpec(0.1, mode=ThermalMode.ZERO_T)
    with pytest.raises(ValueError):
        ThermalSpec.finite(0.1, rel_tol=1.5)
    with pytest.raises(ValueError):
        ThermalSpec.finite(0.0)


def test_geometric_series():
    r = weighted_sum(lambda x: np.exp(-x), ThermalSpec.finite(1.0, rel_tol=1e-14))
    assert r.converged
    assert r.value == pytest.approx(0.5 + np.exp(-2 * np.pi) / (1 - np.exp(-2 * np.pi)), rel=1e-13)


def test_zero_term():
    r = weighted_sum(lambda x: 0.0, ThermalSpec.finite(1.0))
    assert r.value == 0.0 and r.converged


def test_zero_temperature_integral():
    r = weighted_sum(lambda x: np.exp(-x), ThermalSpec.zero(1e-12))
    assert r.converged
    assert r.value == pytest.approx(1 / (2 * np.pi), rel=1e-10)


def test_truncation_flag():
    r = weighted_sum(lambda x: 1.0 / (1 + x), ThermalSpec.finite(1.0, n_max=5))
    assert not r.converged and r.n_terms == 6 and r.flag == "truncated"


@pytest.mark.parametrize(
    "f, tol",
    [
        # even integrand: the primed sum is exact up to exponentially small terms
        (lambda x: np.exp(-x * x), 1e-8),
        # f'(0) != 0 leaves an O(T^2) Euler-Maclaurin remainder, about 4e-6 here
        (lambda x: np.exp(-x) / (1 + x * x), 1e-5),
    ],
)
def test_low_temperature_limit(f, tol):
    zero = weighted_sum(f, ThermalSpec.zero(tol)).value
    finite = weighted_sum(f, ThermalSpec.finite(1e-3, n_max=100000, rel_tol=tol)).value
    assert abs(finite - zero) < 5 * tol * abs(zero)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.05, 2.0), st.floats(0.5, 3.0))
def test_doubling_n_max_is_stable(T, a):
    tol = 1e-9
    f = lambda x: np.exp(-a * x)
    one = weighted_sum(f, ThermalSpec.finite(T, n_max=2000, rel_tol=tol))
    two = weighted_sum(f, ThermalSpec.finite(T, n_max=4000, rel_tol=tol))
    assert one.converged
    assert abs(one.value - two.value) <= tol * abs(two.value)
