"""Eigenvalue rates, matched speeds, and the envelope speed bracket."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import bistable_waves as bw
from bistable_waves.errors import NoPositiveRoot
from conftest import closed_form_speed, oracle_match_speed

speeds = st.floats(0.0, 10.0, allow_nan=False)
neg_slopes = st.floats(-10.0, -0.01, allow_nan=False)
branch_points = st.floats(0.05, 0.95, allow_nan=False)


def test_eigen_rates_examples():
    r = bw.eigen_rates(0.0, -1.0, -1.0)
    assert r.lambda0_plus == pytest.approx(1.0, abs=1e-14)
    assert r.lambda1_minus == pytest.approx(-1.0, abs=1e-14)
    assert bw.eigen_rates(1.0, -1.0, -1.0).lambda0_plus == pytest.approx(
        (1 + math.sqrt(5)) / 2, abs=1e-12
    )
    assert bw.eigen_rates(0.0, -1.3, -1.0).lambda0_plus == pytest.approx(
        math.sqrt(1.3), abs=1e-12
    )


def test_eigen_rates_domain_errors():
    with pytest.raises(ValueError):
        bw.eigen_rates(1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        bw.eigen_rates(1.0, -1.0, 0.5)
    with pytest.raises(ValueError):
        bw.eigen_rates(-0.1, -1.0, -1.0)


@settings(max_examples=100, deadline=None)
@given(c=speeds, alpha=neg_slopes, beta=neg_slopes)
def test_characteristic_residual(c, alpha, beta):
    r = bw.eigen_rates(c, alpha, beta)
    scale0 = max(1.0, r.lambda0_plus**2)
    scale1 = max(1.0, r.lambda1_minus**2)
    assert abs(r.lambda0_plus**2 - c * r.lambda0_plus + alpha) <= 1e-12 * scale0
    assert abs(r.lambda1_minus**2 - c * r.lambda1_minus + beta) <= 1e-12 * scale1
    assert r.lambda0_plus > 0.0 > r.lambda1_minus


def test_rates_increase_with_c():
    cs = np.linspace(0.0, 10.0, 201)
    lam0 = np.array([bw.lambda0_plus(c, -0.7) for c in cs])
    lam1 = np.array([bw.lambda1_minus(c, -1.9) for c in cs])
    assert np.all(np.diff(lam0) > 0.0)
    assert np.all(np.diff(lam1) > 0.0)


def test_match_speed_closed_form():
    assert bw.match_speed(-1.0, -1.0, 0.3) == pytest.approx(
        closed_form_speed(0.3), abs=1e-9
    )
    assert bw.match_speed(-1.0, -1.0, 0.3) == pytest.approx(0.872872, abs=1e-6)
    assert bw.match_speed(-1.0, -1.0, 0.45) == pytest.approx(
        closed_form_speed(0.45), abs=1e-9
    )


def test_match_speed_symmetric_boundary():
    assert bw.match_speed(-1.0, -1.0, 0.5) == 0.0


def test_match_speed_demo_check_pairing():
    # c_check for the demo term, against the independent bisection oracle
    c = bw.match_speed(-1.3, -0.5, 0.3)
    assert c == pytest.approx(oracle_match_speed(-1.3, -0.5, 0.3), abs=1e-9)
    assert c == pytest.approx(0.325, abs=1e-3)


def test_match_speed_no_positive_root():
    # sqrt(-beta)*(1-a) < sqrt(-alpha)*a
    with pytest.raises(NoPositiveRoot):
        bw.match_speed(-4.0, -0.25, 0.5)


@settings(max_examples=60, deadline=None)
@given(alpha=neg_slopes, beta=neg_slopes, a=branch_points)
def test_match_speed_satisfies_rate_ratio_form(alpha, beta, a):
    """The rearranged residual really is the derivative-matching condition:
    at the returned speed, a = lam1 / (lam1 - lam0)."""
    if math.sqrt(-beta) * (1 - a) <= math.sqrt(-alpha) * a + 1e-3:
        return
    c = bw.match_speed(alpha, beta, a)
    lam0 = bw.lambda0_plus(c, alpha)
    lam1 = bw.lambda1_minus(c, beta)
    assert lam1 / (lam1 - lam0) == pytest.approx(a, abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(alpha=neg_slopes, beta=neg_slopes, a=branch_points)
def test_residual_strictly_decreasing(alpha, beta, a):
    cs = np.linspace(0.0, 10.0, 101)
    vals = [bw.speed_residual(c, alpha, beta, a) for c in cs]
    assert np.all(np.diff(vals) < 0.0)


@settings(max_examples=50, deadline=None)
@given(alpha=neg_slopes, beta=neg_slopes, a=branch_points)
def test_matched_wave_gap_vanishes(alpha, beta, a):
    if math.sqrt(-beta) * (1 - a) <= math.sqrt(-alpha) * a + 1e-3:
        return
    w = bw.matched_wave(alpha, beta, a)
    assert abs(bw.derivative_gap(w)) <= 1e-9


def test_derivative_gap_examples():
    w = bw.EnvelopeWave(c=0.0, rate_left=1.0, rate_right=-1.0, a=0.3)
    assert bw.derivative_gap(w) == pytest.approx(-0.4, abs=1e-14)
    w = bw.EnvelopeWave(c=0.0, rate_left=1.0, rate_right=-1.0, a=0.5)
    assert bw.derivative_gap(w) == pytest.approx(0.0, abs=1e-14)


def test_envelope_profile_values():
    w = bw.EnvelopeWave(c=1.0, rate_left=1.0, rate_right=-1.0, a=0.3)
    assert bw.envelope_profile(w, 0.0) == pytest.approx(0.3, abs=1e-15)
    assert bw.envelope_profile(w, -1.0) == pytest.approx(0.3 * math.exp(-1), abs=1e-12)
    assert bw.envelope_profile(w, 50.0) == pytest.approx(1.0, abs=1e-12)
    z = np.linspace(-20.0, 20.0, 2001)
    vals = bw.envelope_profile(w, z)
    assert np.all(np.diff(vals) > 0.0)
    assert vals[0] < 1e-8 and vals[-1] > 1.0 - 1e-8


def test_speed_bracket_demo(demo):
    b = bw.slope_bounds(demo)
    br = bw.speed_bracket(b, demo.a)
    assert br.ordering_ok
    assert br.c_check == pytest.approx(oracle_match_speed(-1.3, -0.5, 0.3), abs=1e-9)
    assert br.c_under == pytest.approx(oracle_match_speed(-1.3, -1.2, 0.3), abs=1e-9)
    assert br.c_over == pytest.approx(oracle_match_speed(-1.0, -0.5, 0.3), abs=1e-9)
    assert br.c_hat == pytest.approx(oracle_match_speed(-1.0, -1.2, 0.3), abs=1e-9)
    assert 0.0 < br.c_check <= min(br.c_under, br.c_over)
    assert max(br.c_under, br.c_over) <= br.c_hat


def test_speed_bracket_collapses_for_linear():
    lin = bw.piecewise_linear(-1.0, 0.3)
    br = bw.speed_bracket(bw.slope_bounds(lin), 0.3)
    want = closed_form_speed(0.3)
    for c in (br.c_check, br.c_under, br.c_over, br.c_hat):
        assert c == pytest.approx(want, abs=1e-10)
    assert br.ordering_ok


def test_speed_bracket_degenerate_symmetric():
    lin = bw.piecewise_linear(-1.0, 0.5)
    br = bw.speed_bracket(bw.slope_bounds(lin), 0.5)
    for c in (br.c_check, br.c_under, br.c_over, br.c_hat):
        assert c == 0.0
    assert not br.ordering_ok


def test_speed_bracket_propagates_failure_with_entry():
    b = bw.SlopeBounds(alpha_lo=-4.0, alpha_hi=-4.0, beta_lo=-0.25, beta_hi=-0.25)
    with pytest.raises(NoPositiveRoot) as exc:
        bw.speed_bracket(b, 0.5)
    assert "c_check" in str(exc.value)
