"""Element transforms, state containers, and their validation rules."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from roeguidance.orbits import (
    ChiefOrbit,
    DimRoeState,
    OrbitalElements,
    RoeVector,
    dimensionalize,
    elements_from_roe,
    roe_from_elements,
    undimensionalize,
)

CHIEF_ELEMENTS = OrbitalElements(
    a=6771e3, theta=math.pi, e_x=1e-3, e_y=0.0, i=math.radians(98.0), raan=0.0
)


def test_mean_motion_and_period():
    chief = ChiefOrbit(CHIEF_ELEMENTS)
    n = math.sqrt(chief.mu / chief.a**3)
    assert chief.mean_motion == pytest.approx(n, rel=1e-15)
    assert chief.period == pytest.approx(2.0 * math.pi / n, rel=1e-15)


def test_eccentricity_and_perigee_from_vector():
    el = OrbitalElements(
        a=7000e3, theta=0.2, e_x=3e-3, e_y=4e-3, i=1.0, raan=0.5
    )
    assert el.eccentricity == pytest.approx(5e-3, rel=1e-12)
    assert el.arg_perigee == pytest.approx(math.atan2(4.0, 3.0), rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(a=-1.0, theta=0.0, e_x=0.0, e_y=0.0, i=1.0, raan=0.0),
        dict(a=7e6, theta=0.0, e_x=0.8, e_y=0.7, i=1.0, raan=0.0),
        dict(a=7e6, theta=0.0, e_x=0.0, e_y=0.0, i=0.0, raan=0.0),
        dict(a=7e6, theta=0.0, e_x=0.0, e_y=0.0, i=math.pi, raan=0.0),
    ],
)
def test_element_validation(kwargs):
    with pytest.raises(ValueError):
        OrbitalElements(**kwargs)


def test_roe_roundtrip_exact():
    roe = RoeVector(1e-5, -3e-5, 2e-5, -4e-6, 5e-6, 7e-6)
    deputy = elements_from_roe(roe, CHIEF_ELEMENTS)
    back = roe_from_elements(deputy, CHIEF_ELEMENTS)
    np.testing.assert_allclose(
        back.as_array(), roe.as_array(), rtol=0.0, atol=1e-15
    )


@given(
    values=st.lists(
        st.floats(min_value=-5e-3, max_value=5e-3), min_size=6, max_size=6
    )
)
@settings(max_examples=50, deadline=None)
def test_roe_roundtrip_property(values):
    roe = RoeVector(*values)
    deputy = elements_from_roe(roe, CHIEF_ELEMENTS)
    back = roe_from_elements(deputy, CHIEF_ELEMENTS)
    np.testing.assert_allclose(
        back.as_array(), roe.as_array(), rtol=0.0, atol=1e-12
    )


def test_roe_wraps_angle_seam():
    chief = OrbitalElements(
        a=6771e3, theta=2.0 * math.pi - 1e-6, e_x=1e-3, e_y=0.0,
        i=math.radians(98.0), raan=2.0 * math.pi - 1e-6,
    )
    deputy = OrbitalElements(
        a=chief.a, theta=1e-6, e_x=1e-3, e_y=0.0, i=chief.i, raan=1e-6
    )
    roe = roe_from_elements(deputy, chief)
    assert abs(roe.dlambda) < 1e-5
    assert abs(roe.diy) < 1e-5


def test_roe_warns_outside_linear_range():
    with pytest.warns(UserWarning, match="linear-model range"):
        RoeVector(0.05, 0.0, 0.0, 0.0, 0.0, 0.0)


def test_dimensionalize_roundtrip():
    chief = ChiefOrbit(CHIEF_ELEMENTS)
    roe = RoeVector(1e-5, -3e-5, 2e-5, -4e-6, 5e-6, 7e-6)
    state = dimensionalize(roe, chief)
    assert state.values[0] == pytest.approx(chief.a * 1e-5, rel=1e-15)
    back = undimensionalize(state, chief)
    np.testing.assert_allclose(
        back.as_array(), roe.as_array(), rtol=1e-15, atol=0.0
    )


def test_dim_state_validation():
    with pytest.raises(ValueError):
        DimRoeState(np.zeros(5))
    with pytest.raises(ValueError):
        DimRoeState(np.array([0.0, np.nan, 0.0, 0.0, 0.0, 0.0]))


def test_dim_state_is_frozen_and_comparable():
    state = DimRoeState(np.arange(6.0))
    with pytest.raises(ValueError):
        state.values[0] = 9.0
    assert state == DimRoeState(np.arange(6.0))
    assert state != DimRoeState(np.arange(6.0) + 1.0)


def test_chief_orbit_validation():
    with pytest.raises(ValueError):
        ChiefOrbit(CHIEF_ELEMENTS, mu=-1.0)
