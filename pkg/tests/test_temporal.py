import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pondharvest.errors import DimensionMismatch, NonFiniteState
from pondharvest.model import carrying_capacity, make_model
from pondharvest.control import equilibrium_levels, switch_indicator
from pondharvest.temporal import (
    controlled_regime_closed_form,
    integrate_temporal,
    rhs_controlled,
    rhs_uncontrolled,
)


def test_rhs_uncontrolled_values(single):
    assert rhs_uncontrolled(single, [0.0])[0] == 0.0
    assert rhs_uncontrolled(single, carrying_capacity(single))[0] == pytest.approx(0.0, abs=1e-9)
    assert rhs_uncontrolled(single, [100.0])[0] == pytest.approx(8.83, abs=1e-12)


def test_rhs_uncontrolled_dimension(two):
    with pytest.raises(DimensionMismatch):
        rhs_uncontrolled(two, [1.0, 2.0, 3.0])


def test_rhs_uncontrolled_coexistence_point():
    # Weak competition: interior equilibrium solves b w = a.
    spec = make_model([1.0, 0.8], [[0.01, 0.002], [0.003, 0.02]], [1, 1], [0, 0])
    w = np.linalg.solve(spec.b, spec.a)
    assert np.all(w > 0)
    np.testing.assert_allclose(rhs_uncontrolled(spec, w), 0.0, atol=1e-9)


def test_rhs_controlled_values(single, single_levels):
    assert rhs_controlled(single, single_levels, [140.0])[0] == rhs_uncontrolled(single, [140.0])[0]
    # P - tau * 400 with P = 368.38265...
    assert rhs_controlled(single, single_levels, [400.0])[0] == pytest.approx(
        single_levels.p[0] - 400.0, abs=1e-12)
    assert rhs_controlled(single, single_levels, [400.0])[0] == pytest.approx(-31.6173, abs=1e-4)


def test_rhs_controlled_vanishes_at_w_star(single, single_levels, two, two_levels):
    for spec, lv in ((single, single_levels), (two, two_levels)):
        np.testing.assert_allclose(rhs_controlled(spec, lv, lv.w_star), 0.0, atol=1e-9)


def test_rhs_controlled_continuous_at_threshold(single, single_levels):
    xi = single_levels.xi[0]
    below = rhs_controlled(single, single_levels, [xi * (1 - 1e-12)])[0]
    above = rhs_controlled(single, single_levels, [xi * (1 + 1e-12)])[0]
    assert below == pytest.approx(above, abs=1e-6)


def test_closed_form_fixed_point_and_limit(single, single_levels):
    w_star = single_levels.w_star
    np.testing.assert_allclose(
        controlled_regime_closed_form(single, single_levels, w_star, 7.0), w_star)
    far = controlled_regime_closed_form(single, single_levels, [700.0], 100.0)
    assert abs(far[0] - w_star[0]) <= (700 - w_star[0]) * math.exp(-100) * 1.0001


def test_closed_form_matches_fine_rk4(single, single_levels):
    exact = controlled_regime_closed_form(single, single_levels, [700.0], 1.0)[0]
    assert exact == pytest.approx(490.37, abs=0.01)
    traj = integrate_temporal(single, single_levels, [700.0], 1.0, 1e-5)
    assert traj.regime.all()
    assert traj.final[0] == pytest.approx(exact, rel=1e-6)


def test_rk4_agrees_with_closed_form_when_never_switching(two, two_levels):
    traj = integrate_temporal(two, two_levels, [700.0, 350.0], 5.0, 0.01)
    assert traj.regime.all()
    exact = np.stack([controlled_regime_closed_form(two, two_levels, [700.0, 350.0], t)
                      for t in traj.times], axis=1)
    np.testing.assert_allclose(traj.states, exact, rtol=1e-6)


def test_single_species_reaches_w_star(single, single_levels):
    traj = integrate_temporal(single, single_levels, [140.0], 30.0, 0.006)
    assert traj.final[0] == pytest.approx(368.38, abs=0.01)
    assert traj.times[-1] == 30.0 and traj.times.size == 5001


def test_two_species_reach_w_star(two, two_levels):
    traj = integrate_temporal(two, two_levels, [700.0, 350.0], 30.0, 0.006)
    np.testing.assert_allclose(traj.final, [414.23, 110.66], atol=0.05)


def test_uncontrolled_reaches_capacity(single, single_levels):
    traj = integrate_temporal(single, single_levels, [140.0], 120.0, 0.006, control_enabled=False)
    assert traj.final[0] == pytest.approx(700.68, abs=0.5)
    assert not traj.regime.any()
    assert np.all(traj.controls == 0)


def test_default_step_count(single, single_levels):
    traj = integrate_temporal(single, single_levels, [140.0], 30.0)
    assert traj.times.size == 5001


def test_trajectory_records(single, single_levels):
    traj = integrate_temporal(single, single_levels, [140.0], 30.0, 0.006)
    assert np.all(np.diff(traj.times) > 0)
    assert np.all(traj.states >= 0) and np.all(traj.controls >= 0)
    np.testing.assert_array_equal(traj.regime, switch_indicator(single, traj.states) > 0)


def test_monotone_approach_single(single, single_levels):
    down = integrate_temporal(single, single_levels, [700.0], 20.0, 0.01)
    assert np.all(np.diff(down.states[0]) <= 0)
    assert np.all(down.states[0] >= single_levels.w_star[0] - 1e-9)
    up = integrate_temporal(single, single_levels, [140.0], 30.0, 0.01)
    assert np.all(np.diff(up.states[0]) >= 0)


def test_step_halving(single, single_levels, two, two_levels):
    for spec, lv, w0, horizon in ((single, single_levels, [140.0], 30.0),
                                  (two, two_levels, [280.0, 80.0], 30.0),
                                  (single, single_levels, [700.0], 3.0)):
        coarse = integrate_temporal(spec, lv, w0, horizon, 0.01).final
        fine = integrate_temporal(spec, lv, w0, horizon, 0.005).final
        np.testing.assert_allclose(fine, coarse, rtol=1e-4)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_huge_step_reports_non_finite():
    spec = make_model(1.0, 1.0, 1.0, 0.0)
    lv = equilibrium_levels(spec)
    with pytest.raises(NonFiniteState):
        integrate_temporal(spec, lv, [1e3], 1e4, 100.0, control_enabled=False)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 1500.0), st.floats(0.0, 800.0))
def test_non_negative_two_species(w1, w2):
    spec = make_model([0.061, 0.087], [[0.0000614, 0.00001], [0.0001, 0.0001992]], [1, 1], [0, 0])
    lv = equilibrium_levels(spec)
    traj = integrate_temporal(spec, lv, [w1, w2], 10.0, 0.05)
    assert np.all(traj.states >= 0)
    assert np.all(traj.controls >= 0)
