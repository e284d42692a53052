import numpy as np
import pytest
from hypothesis import given, strategies as st

from corruwave.classical import BoundaryConditions, linear_solution
from corruwave.design import (PUMP, SUBHARMONIC, analytic_design, combined_pump_condition,
                              combined_subharmonic_condition, detuning, enhancement_factor,
                              forward_coefficients, improvement_db, optimize_design,
                              pump_corrugation_match, pump_mismatch_for_coupling, resonance_residuals,
                              subharmonic_corrugation_match, subharmonic_mismatch_for_coupling,
                              transmission_peak)
from corruwave.errors import DegenerateMismatch, DomainError, InfeasibleBranch
from corruwave.modes import CouplingSet

L = 1e-3


def test_residuals_without_corrugation():
    res = resonance_residuals(4.0, 0.0, 0.0, 0.0, 0.0)
    assert np.allclose(res, 4.0)
    assert np.all(resonance_residuals(0, 0, 0, 0, 0) == 0)


def test_residuals_flag_band_gap():
    res = resonance_residuals(1.0, 0.0, 1.0, 0.0, 5.0)
    assert np.iscomplexobj(res)


@given(st.floats(-40, -1) | st.floats(1, 40), st.floats(0, 30))
def test_pump_match_zeroes_a_residual(dnl, K):
    dp, _ = pump_corrugation_match(dnl, K)
    assert np.sign(dp) == np.sign(dnl)
    res = resonance_residuals(dnl, 0.0, dp, 0.0, K)
    assert np.min(np.abs(res)) < 1e-9 * abs(dnl)


@given(st.floats(-40, -1) | st.floats(1, 40), st.floats(0, 30))
def test_subharmonic_match_zeroes_a_residual(dnl, K):
    ds, _ = subharmonic_corrugation_match(dnl, K)
    assert np.sign(ds) == -np.sign(dnl)
    res = resonance_residuals(dnl, ds, 0.0, K, 0.0)
    assert np.min(np.abs(res)) < 1e-9 * max(abs(dnl), abs(ds))


def test_match_examples():
    assert pump_corrugation_match(-10.82, 0.0)[0] == -10.82
    assert pump_corrugation_match(-10.82, 5.0)[0] == pytest.approx(-10.82 + 25 / -10.82)
    assert subharmonic_corrugation_match(8.0, 2.0)[0] == pytest.approx(-5.0)
    assert subharmonic_corrugation_match(8.0, 0.0)[0] == pytest.approx(-4.0)
    with pytest.raises(DegenerateMismatch):
        pump_corrugation_match(0.0, 1.0)
    with pytest.raises(DegenerateMismatch):
        subharmonic_corrugation_match(0.0, 1.0)


def test_periods_consistent_with_mismatch_definition():
    beta_p, beta_s = 2.7e7, 1.27e7
    dnl, K = -10.82e3, 13.6e3
    dp, period = pump_corrugation_match(dnl, K, beta_p)
    assert 2 * beta_p - 2 * np.pi / period == pytest.approx(dp, rel=1e-9)
    ds, period = subharmonic_corrugation_match(dnl, K / 3, beta_s)
    assert 2 * beta_s - 2 * np.pi / period == pytest.approx(ds, rel=1e-9)


def test_transmission_peak_examples():
    assert transmission_peak(0.0, 1.0, 1, 1)[0] == pytest.approx(2 * np.pi)
    assert transmission_peak(0.0, 1.0, 1, -1)[0] == pytest.approx(-2 * np.pi)
    assert transmission_peak(5.0, 1.0, 1, 1)[0] == pytest.approx(11.81, abs=5e-3)
    d, period = transmission_peak(5e3, L, 1, 1, beta=2.7e7)
    assert 2 * 2.7e7 - 2 * np.pi / period == pytest.approx(d, rel=1e-9)
    assert detuning(d, 5e3).real == pytest.approx(np.pi / L)
    with pytest.raises(DomainError):
        transmission_peak(1.0, L, 0)


@given(st.floats(0, 60), st.integers(1, 5), st.sampled_from([1, -1]))
def test_transmission_peak_has_no_reflection(Kr, m, sign):
    d, _ = transmission_peak(Kr / L, L, m, sign)
    cs = CouplingSet(K_p=1j * Kr / L, delta_p=d)
    st_ = linear_solution(cs, BoundaryConditions(pF_in=1.0), np.array([0.0, L]))
    assert abs(st_["pB"][0]) < 1e-10 and abs(st_["pB"][-1]) < 1e-10
    assert abs(st_["pF"][-1]) == pytest.approx(1.0, abs=1e-10)


def test_combined_conditions():
    assert combined_pump_condition(-10.82, 1.0, 1, 1) == pytest.approx(10.82 * np.sqrt(1 + 2 * np.pi / 10.82))
    assert combined_pump_condition(-10.82, 1.0, 1, 1) == pytest.approx(13.60, abs=5e-3)
    assert combined_subharmonic_condition(4 * np.pi, 1.0, 1, 1) == pytest.approx(2 * np.pi * np.sqrt(2))
    with pytest.raises(InfeasibleBranch):
        combined_subharmonic_condition(5.0, 1.0, 1, -1)
    with pytest.raises(InfeasibleBranch):
        combined_pump_condition(3.0, 1.0, 1, -1)
    # large-L limit
    K = combined_pump_condition(1e4, 1e3, 1, 1)
    assert K == pytest.approx(1e4, rel=1e-3)


@given(st.floats(1, 60), st.integers(1, 4), st.sampled_from([1, -1]))
def test_inverse_conditions(Kr, m, sign):
    x = pump_mismatch_for_coupling(Kr, 1.0, m, sign)
    if x > 0:
        assert combined_pump_condition(x, 1.0, m, sign) == pytest.approx(Kr, rel=1e-9)
    y = subharmonic_mismatch_for_coupling(Kr, 1.0, m, sign)
    if y > 0:
        assert combined_subharmonic_condition(y, 1.0, m, sign) == pytest.approx(Kr, rel=1e-9)


@given(st.floats(-40, -2) | st.floats(2, 40), st.integers(1, 3))
def test_design_closure(dnl_r, m):
    for placement in (PUMP, SUBHARMONIC):
        try:
            p = analytic_design(1.0, delta_nl=dnl_r, placement=placement, m=m, sign=1)
        except InfeasibleBranch:
            continue
        if placement == PUMP:
            assert np.sign(p.delta) == np.sign(p.delta_nl)
            assert p.delta == pytest.approx(pump_corrugation_match(p.delta_nl, p.K)[0], rel=1e-9)
        else:
            assert np.sign(p.delta) == -np.sign(p.delta_nl)
            assert p.delta == pytest.approx(subharmonic_corrugation_match(p.delta_nl, p.K)[0], rel=1e-9)
        assert detuning(p.delta, p.K).real == pytest.approx(m * np.pi, rel=1e-9)


def test_enhancement_examples():
    assert enhancement_factor(0.0, L) == 1.0
    assert enhancement_factor(5.0, 1.0) == pytest.approx(1.44, abs=5e-3)
    M = [enhancement_factor(10.0, 1.0, m) for m in range(1, 6)]
    assert all(a > b for a, b in zip(M, M[1:]))
    with pytest.raises(DomainError):
        enhancement_factor(1.0, 1.0, 0)


@given(st.floats(0, 60), st.floats(0, 60))
def test_enhancement_increases_with_coupling(K1, K2):
    if K1 + 1e-3 < K2:
        assert enhancement_factor(K1, 1.0) < enhancement_factor(K2, 1.0)


def test_enhancement_equals_coefficient_ratio():
    rng = np.random.default_rng(48)
    for _ in range(20):
        Kr, m, sign = rng.uniform(0.5, 60), int(rng.integers(1, 6)), rng.choice([1, -1])
        d, _ = transmission_peak(Kr / L, L, m, sign)
        A0 = rng.uniform(0.5, 2) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        Bp, Bm = forward_coefficients(d, 1j * Kr / L, L, A0, 0.0)
        ratio = max(abs(Bp), abs(Bm)) / abs(A0)
        assert abs(Bp) >= abs(Bm)
        assert ratio == pytest.approx(enhancement_factor(Kr / L, L, m), abs=1e-9)


def test_improvement_db():
    assert improvement_db(0.45, 0.45) == 0
    assert improvement_db(0.2, 0.45) == pytest.approx(3.52, abs=5e-3)
    assert improvement_db(0.045, 0.45) == pytest.approx(10.0)
    with pytest.raises(DomainError):
        improvement_db(0.0, 0.45)


def test_optimize_never_worse_and_plus_branch_wins(device):
    p_plus = optimize_design(device, delta_nl=-20 / L, sign=1, max_evals=30)
    assert p_plus.lambda_sF <= p_plus.lambda_sF_analytic
    assert p_plus.corrugation_period > 0 and p_plus.poling_period > 0
    assert p_plus.evaluations <= 31
    p_minus = optimize_design(device, delta_nl=-20 / L, sign=-1, refine=False)
    assert p_plus.lambda_sF < p_minus.lambda_sF


def test_optimize_from_corrugation_depth(device):
    p = optimize_design(device, t_l=2e-9, refine=False)
    assert p.K > 0 and np.sign(p.delta) == np.sign(p.delta_nl)
    assert 0 < p.lambda_sF < 1


def test_optimize_subharmonic_placement(device):
    p = optimize_design(device, delta_nl=-10.82 / L, placement=SUBHARMONIC, refine=False)
    assert np.sign(p.delta) == 1
    assert p.result.commutator < 1e-8
