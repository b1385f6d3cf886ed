import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from echo_area.areas import (
    ClosedFormParams,
    branch_offset,
    eta_step,
    mccall_hahn_closed,
    primary_echo_closed,
    secondary_echo_approx,
    theta1_closed,
    theta2_closed,
    total_echo_area,
)
from oracles import area_ode

open_area = st.floats(0.01, 2 * np.pi - 0.01).filter(lambda x: abs(x - np.pi) > 1e-3)
Z = np.linspace(0.0, 30.0, 61)


def test_branch_offset():
    assert branch_offset(0.5) == 0.0
    assert branch_offset(1.5 * np.pi) == pytest.approx(2 * np.pi)
    assert branch_offset(-1.5 * np.pi) == pytest.approx(-2 * np.pi)


def test_weak_pulse_beer_law():
    th = theta1_closed(1e-6, Z)
    assert th == pytest.approx(1e-6 * np.exp(-Z / 2), rel=1e-9)


def test_pi_pulse_is_fixed():
    assert theta1_closed(np.pi, Z) == pytest.approx(np.full_like(Z, np.pi))


def test_above_pi_tends_to_two_pi():
    assert theta1_closed(1.001 * np.pi, 40.0) == pytest.approx(2 * np.pi, abs=1e-4)


def test_second_pulse_closed_form_as_sech():
    # tan(theta2/2) = kappa sech(beta - z/2)
    t1, t2 = 0.3 * np.pi, 0.6 * np.pi
    p = ClosedFormParams.from_inputs(t1, t2)
    ref = 2 * np.arctan(p.kappa / np.cosh(p.beta - Z / 2))
    assert theta2_closed(t1, t2, Z) == pytest.approx(ref, abs=1e-12)


@given(open_area)
def test_theta1_against_ode(t1):
    ref = area_ode(t1, lambda z: -1.0, Z)
    assert theta1_closed(t1, Z) == pytest.approx(ref, abs=1e-6)


@given(open_area, open_area)
def test_theta2_against_ode(t1, t2):
    def w0(z):
        return -np.cos(theta1_closed(t1, z))

    ref = area_ode(t2, w0, Z)
    assert theta2_closed(t1, t2, Z) == pytest.approx(ref, abs=1e-6)


@given(open_area, open_area)
def test_total_echo_area_identity(t1, t2):
    total = theta1_closed(t1, Z) + theta2_closed(t1, t2, Z) + total_echo_area(t1, t2, Z)
    assert total == pytest.approx(mccall_hahn_closed(t1, t2, Z), abs=1e-12)


@given(open_area, open_area)
def test_closed_forms_continuous(t1, t2):
    z = np.linspace(0, 40, 4001)
    for th in (theta1_closed(t1, z), theta2_closed(t1, t2, z)):
        assert np.max(np.abs(np.diff(th))) < 0.05


def test_primary_echo_bounded():
    z = np.linspace(0, 60, 601)
    e = primary_echo_closed(0.5 * np.pi, theta2_closed(0.5 * np.pi, 0.9 * np.pi, z), 1.0, z)
    assert np.all(np.abs(e) < np.pi)


def test_eta_step_exact_for_frozen_sources():
    # closed solution (eta + v/w) e^{w z/2} - v/w
    eta0, v, w, dz = 0.3, 0.4, -0.7, 0.05
    ref = (eta0 + v / w) * np.exp(w * dz / 2) - v / w
    assert eta_step(eta0, v, w, dz) == pytest.approx(ref, rel=1e-14)
    assert eta_step(eta0, v, 0.0, dz) == pytest.approx(eta0 + v * dz / 2)


def test_secondary_echo_rejects_depth_before_handoff():
    with pytest.raises(ValueError):
        secondary_echo_approx(4.1, 1.0, lambda z: z, 1.0, np.array([3.0, 5.0]))


def test_secondary_echo_zero_at_handoff():
    assert secondary_echo_approx(4.1, 1.0, lambda z: 0.5, 1.0, 4.1) == pytest.approx(0.0)


def test_theta1_example_against_ode():
    ref = 2 * np.arctan(np.exp(-2.05) * np.tan(0.05 * np.pi))
    assert theta1_closed(0.1 * np.pi, 4.1) == pytest.approx(ref, abs=1e-15)
    assert area_ode(0.1 * np.pi, lambda z: -1.0, np.array([4.1]))[0] == pytest.approx(ref, abs=1e-8)


def test_second_pulse_below_pi_decreases():
    z = np.linspace(0, 40, 4001)
    th = theta2_closed(0.1 * np.pi, 0.999 * np.pi, z)
    assert np.all(np.diff(th) < 0)


def test_second_pulse_above_pi_rises_to_two_pi():
    z = np.linspace(0, 40, 4001)
    th = theta2_closed(0.1 * np.pi, 1.001 * np.pi, z)
    assert np.all(np.diff(th) > 0)
    assert th[-1] == pytest.approx(2 * np.pi, abs=1e-3)


def test_totals_limits():
    assert mccall_hahn_closed(0.1 * np.pi, 0.999 * np.pi, 60.0) == pytest.approx(2 * np.pi, abs=1e-9)
    assert total_echo_area(0.1 * np.pi, 1.001 * np.pi, 60.0) == pytest.approx(0.0, abs=1e-9)


def test_rhs_example():
    from echo_area.areas import echo_area_rhs

    assert echo_area_rhs(np.pi / 2, 0.5, -0.5) == pytest.approx(0.0, abs=1e-15)


@given(st.floats(-3, 3), st.floats(-1, 1), st.floats(-1, 1))
def test_eta_step_matches_rk4(eta, v, w):
    h = 1e-3

    def f(e):
        return 0.5 * (v + w * e)

    k1 = f(eta)
    k2 = f(eta + 0.5 * h * k1)
    k3 = f(eta + 0.5 * h * k2)
    k4 = f(eta + h * k3)
    ref = eta + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert eta_step(eta, v, w, h) == pytest.approx(ref, abs=h**2)


def test_primary_echo_example():
    th2 = theta2_closed(0.1 * np.pi, 0.999 * np.pi, 4.1)
    k = np.sin(0.1 * np.pi) * np.sin(th2 / 2) ** 2 * np.sinh(2.05)
    assert k == pytest.approx(1.18, abs=0.01)
    assert primary_echo_closed(0.1 * np.pi, th2, 1.0, 4.1) / np.pi == pytest.approx(0.55, abs=0.01)
