import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from echo_area.bloch import (
    GROUND,
    BlochVector,
    FreeEvolution,
    PulseRotation,
    apply_pulse,
    free_evolve,
    resonant_pulse_response,
    rk4_bloch,
)

angles = st.floats(-2 * np.pi, 2 * np.pi, allow_nan=False)


def test_pi_pulse_inverts():
    r = apply_pulse(GROUND, PulseRotation(np.pi))
    assert r.w == pytest.approx(1.0)
    assert r.v == pytest.approx(0.0, abs=1e-15)


def test_half_pi_pulse_coherence():
    r = apply_pulse(GROUND, PulseRotation(np.pi / 2))
    assert r.as_array() == pytest.approx([0.0, -1.0, 0.0], abs=1e-15)


def test_negative_duration_rejected():
    with pytest.raises(ValueError):
        FreeEvolution(-0.1)


@given(angles, angles)
def test_pulses_compose(a, b):
    one = apply_pulse(apply_pulse(GROUND, PulseRotation(a)), PulseRotation(b))
    two = apply_pulse(GROUND, PulseRotation(a + b))
    assert one.as_array() == pytest.approx(two.as_array(), abs=1e-12)


@given(angles, st.floats(-50, 50), st.floats(0, 3))
def test_norm_conserved_without_decay(theta, det, t):
    r = free_evolve(apply_pulse(GROUND, PulseRotation(theta)), FreeEvolution(t, det))
    assert r.norm == pytest.approx(1.0, abs=1e-12)


def test_decay_only_transverse():
    r = BlochVector(0.3, 0.4, 0.5)
    out = free_evolve(r, FreeEvolution(2.0, 0.0, 0.5))
    assert out.w == 0.5
    assert np.hypot(out.u, out.v) == pytest.approx(0.5 * np.exp(-1.0))


@given(st.floats(-1, 1), st.floats(-1, 1), angles)
def test_resonant_response_matches_rotation(v0, w0, th):
    r = apply_pulse(BlochVector(0.0, v0, w0), PulseRotation(th))
    assert resonant_pulse_response(v0, w0, th) == pytest.approx((r.v, r.w), abs=1e-12)


def test_rk4_matches_hard_pulse_and_precession():
    area, dur = 0.7 * np.pi, 0.05

    def omega(t):
        return area / dur if t < dur else 0.0

    r = rk4_bloch(GROUND.as_array(), omega, 0.0, dur, 2000)
    assert r == pytest.approx(apply_pulse(GROUND, PulseRotation(area)).as_array(), abs=1e-9)
    r2 = rk4_bloch(r, lambda t: 0.0, 0.0, 1.0, 2000, detuning=3.0, gamma=0.2)
    ref = free_evolve(BlochVector.from_array(r), FreeEvolution(1.0, 3.0, 0.2))
    assert r2 == pytest.approx(ref.as_array(), abs=1e-9)


def test_pulse_on_tilted_state_matches_rk4():
    r0 = BlochVector(0.0, 0.6, -0.8)
    exact = apply_pulse(r0, PulseRotation(0.3))
    c, s = np.cos(0.3), np.sin(0.3)
    assert exact.as_array() == pytest.approx([0.0, 0.6 * c - 0.8 * s, -0.6 * s - 0.8 * c])
    ref = rk4_bloch(r0.as_array(), lambda t: 0.3 / 0.1, 0.0, 0.1, 1000)
    assert exact.as_array() == pytest.approx(ref, abs=1e-10)


def test_precession_angle_and_decay():
    out = free_evolve(BlochVector(1.0, 0.0, -1.0), FreeEvolution(1.0, 2.0, 0.1))
    assert np.hypot(out.u, out.v) == pytest.approx(np.exp(-0.1))
    assert np.arctan2(out.v, out.u) == pytest.approx(2.0)
    ref = rk4_bloch([1.0, 0.0, -1.0], lambda t: 0.0, 0.0, 1.0, 1000, detuning=2.0, gamma=0.1)
    assert out.as_array() == pytest.approx(ref, abs=1e-10)


def test_resonant_response_example():
    r = apply_pulse(BlochVector(0.0, 0.3, -0.9), PulseRotation(1.1))
    assert resonant_pulse_response(0.3, -0.9, 1.1) == pytest.approx((r.v, r.w))
