from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import goldens as g
from echo_area.phasing import (
    TrigPoly,
    evaluate_sources,
    extract_phasing,
    ground_state,
    label_index,
    phasing_sources,
    pulse_label,
    pulse_sequence,
    symbolic_apply_pulse,
    symbolic_free_evolve,
)
from oracles import ensemble_sources

angles = st.floats(0.0, 2 * np.pi, allow_nan=False)


def test_labels_round_trip():
    assert [pulse_label(j) for j in range(4)] == ["1", "2", "e1", "e2"]
    for j in range(12):
        assert label_index(pulse_label(j)) == j


def test_single_pulse_coherence_sign():
    s = symbolic_apply_pulse(ground_state(), "1")
    assert s.v[("cos", 0)] == -TrigPoly.sin("1")
    assert s.w[("cos", 0)] == -TrigPoly.cos("1")


def test_single_pulse_has_no_phased_coherence():
    src = extract_phasing(pulse_sequence(1), 0)
    assert not src.v0_expr
    assert src.w0_expr == -TrigPoly.cos("1")


def test_duplicate_label_rejected():
    s = symbolic_apply_pulse(ground_state(), "1")
    with pytest.raises(ValueError):
        symbolic_apply_pulse(s, "1")


def test_echo_before_last_pulse_rejected():
    with pytest.raises(ValueError):
        extract_phasing(pulse_sequence(3), 1)


def test_repeated_label_product_rejected():
    with pytest.raises(ValueError):
        TrigPoly.sin("1") * TrigPoly.cos("1")


def test_primary_echo_golden():
    src = phasing_sources(1)
    assert src.v0_expr == g.PRIMARY_V
    assert src.w0_expr == g.PRIMARY_W
    assert src.emission_time == 2


def test_secondary_echo_golden():
    src = phasing_sources(2)
    assert src.v0_expr == g.SECONDARY_V
    assert src.w0_expr == g.SECONDARY_W


def test_third_echo_inversion_golden():
    assert phasing_sources(3).w0_expr == g.THIRD_W


def test_third_echo_coherence_has_extra_conjugation_path():
    v = phasing_sources(3).v0_expr
    assert v - g.THIRD_V_REFERENCE == g.THIRD_V_MISSING


def test_coefficients_are_rational():
    for k in range(1, 5):
        src = phasing_sources(k)
        for poly in (src.v0_expr, src.w0_expr):
            assert all(isinstance(c, Fraction) for _, c in poly.items())


def test_term_counts_grow():
    counts = [len(phasing_sources(k).v0_expr) for k in range(1, 6)]
    assert counts == [2, 3, 12, 25, 76]


def test_half_angle_text():
    assert phasing_sources(1).v0_expr.to_text() == "G^2*s1*sin^2(2/2)"
    assert "c1*c2" in phasing_sources(1).w0_expr.to_text()


def test_free_evolve_zero_is_identity():
    s = pulse_sequence(2)
    assert symbolic_free_evolve(s, 0).v == s.v


def test_gamma_validated():
    with pytest.raises(ValueError):
        evaluate_sources(phasing_sources(1), {"1": 1.0, "2": 1.0}, 0.0)


def test_missing_area_rejected():
    with pytest.raises(KeyError):
        evaluate_sources(phasing_sources(1), {"1": 1.0}, 1.0)


@given(st.lists(angles, min_size=2, max_size=2), st.sampled_from([0.5, 0.9, 1.0]))
def test_primary_matches_ensemble_average(areas, gamma_tau):
    v, w = evaluate_sources(phasing_sources(1), {"1": areas[0], "2": areas[1]}, gamma_tau)
    vo, wo = ensemble_sources(areas, 1, gamma_tau)
    assert v == pytest.approx(vo, abs=1e-4)
    assert w == pytest.approx(wo, abs=1e-4)


@given(st.lists(angles, min_size=4, max_size=4))
def test_compiled_matches_exact(areas):
    src = phasing_sources(3)
    d = {pulse_label(j): a for j, a in enumerate(areas)}
    assert src.compile()(areas, 0.8) == pytest.approx(evaluate_sources(src, d, 0.8), abs=1e-12)


@given(st.lists(angles, min_size=3, max_size=3))
def test_sources_bounded_by_bloch_sphere(areas):
    d = {pulse_label(j): a for j, a in enumerate(areas)}
    v, w = evaluate_sources(phasing_sources(2), d, 1.0)
    assert v * v + w * w <= 1 + 1e-12


@given(st.lists(angles, min_size=3, max_size=3))
def test_state_evaluation_stays_on_sphere(areas):
    s = symbolic_free_evolve(pulse_sequence(3), 1)
    d = {pulse_label(j): a for j, a in enumerate(areas)}
    r = s.evaluate(d, 1.0, detuning_tau=0.37)
    assert np.linalg.norm(r) == pytest.approx(1.0, abs=1e-12)


def test_symbolic_state_matches_numeric_bloch():
    from echo_area.bloch import GROUND, FreeEvolution, PulseRotation, apply_pulse, free_evolve

    rng = np.random.default_rng(11)
    s = symbolic_free_evolve(pulse_sequence(2), 1)
    for _ in range(20):
        t1, t2 = rng.uniform(0, 2 * np.pi, 2)
        x, g_tau = rng.uniform(-10, 10), rng.uniform(0.3, 1.0)
        gamma = -np.log(g_tau)
        r = apply_pulse(GROUND, PulseRotation(t1))
        r = free_evolve(r, FreeEvolution(1.0, x, gamma))
        r = apply_pulse(r, PulseRotation(t2))
        r = free_evolve(r, FreeEvolution(1.0, x, gamma))
        sym = s.evaluate({"1": t1, "2": t2}, g_tau, x)
        assert sym == pytest.approx(r.as_array(), abs=1e-12)


def test_secondary_sources_example_against_ensemble():
    areas = [0.1 * np.pi, 0.9 * np.pi, 0.3 * np.pi]
    v, w = evaluate_sources(phasing_sources(2), dict(zip(["1", "2", "e1"], areas)), 0.8)
    vo, wo = ensemble_sources(areas, 2, 0.8)
    assert (v, w) == pytest.approx((vo, wo), abs=1e-4)
