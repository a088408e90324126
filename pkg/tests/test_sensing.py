import math

import numpy as np
import pytest

from dressedsim import control, sensing
from dressedsim.control import (CIRCULAR, ControlScheme, DOUBLE_DRIVE,
                                NoiseModel, SINGLE_DRIVE)
from dressedsim.ensemble import memory_fidelity
from dressedsim.sensing import (CLOCK_CIRCULAR, CLOCK_DOUBLE, FitError,
                                SensitivityParams, clock_comparison,
                                clock_scheme, closed_form_alpha,
                                effective_coupling_alpha, hh_reference,
                                matched_omega2, matched_scheme,
                                matching_condition, predicted_clock_omega1,
                                sensing_scan, sensitivity_eta)

TWO_PI = 2.0 * math.pi


# ---- matching --------------------------------------------------------------

def test_matching_condition_branches():
    s = ControlScheme(CIRCULAR, 10.0, 1.0, 10.05)
    gap = math.hypot(0.05, 1.0)
    assert np.isclose(matching_condition(s, 1), 10.05 + gap)
    assert np.isclose(matching_condition(s, 0), 10.05)
    assert np.isclose(matching_condition(s, -1), 10.05 - gap)
    with pytest.raises(ValueError):
        matching_condition(s, 2)


def test_matched_omega2_reference_point():
    """100 -> 200 carrier-to-signal example: omega2/2pi = 70.71, mod = 125."""
    w1 = TWO_PI * 100.0
    ws = TWO_PI * 200.0
    w2, mod = matched_omega2(CIRCULAR, w1, ws)
    assert np.isclose(w2 / TWO_PI, 100.0 / math.sqrt(2.0), rtol=1e-10)
    assert np.isclose(mod / TWO_PI, 125.0, rtol=1e-10)
    s = matched_scheme(CIRCULAR, w1, ws)
    assert np.isclose(matching_condition(s), ws, rtol=1e-12)
    # detuning is self-consistently noise optimal
    assert np.isclose(s.mod_freq,
                      control.optimal_detuning(CIRCULAR, w1, w2), rtol=1e-12)


def test_matched_omega2_double_drive():
    w1 = TWO_PI * 160.0
    ws = TWO_PI * 200.0
    w2, mod = matched_omega2(DOUBLE_DRIVE, w1, ws)
    wt = w1 + 1.25 * w2 ** 2 / w1
    assert np.isclose(wt + math.hypot(wt - w1, w2), ws, rtol=1e-10)
    with pytest.raises(ValueError):
        matched_omega2(SINGLE_DRIVE, w1, ws)


def test_closed_form_alpha_values():
    w1 = TWO_PI * 100.0
    s = matched_scheme(CIRCULAR, w1, TWO_PI * 200.0)
    # cos = 25/75 = 1/3 at this point
    assert np.isclose(closed_form_alpha(s, 1), (1 - 1 / 3) / 4, rtol=1e-9)
    assert np.isclose(closed_form_alpha(s, -1), (1 + 1 / 3) / 4, rtol=1e-9)
    assert np.isclose(closed_form_alpha(s, 0), 0.25, rtol=1e-12)
    assert closed_form_alpha(hh_reference(1.0)) == 0.5


def test_alpha_rises_with_carrier():
    """Matched alpha grows toward 1/4 as the carrier approaches the signal."""
    ws = TWO_PI * 200.0
    alphas = [closed_form_alpha(matched_scheme(CIRCULAR, TWO_PI * f, ws))
              for f in (100.0, 140.0, 180.0)]
    assert alphas[0] < alphas[1] < alphas[2] < 0.25


# ---- operational alpha -------------------------------------------------------

def test_extracted_alpha_matches_closed_form():
    s = matched_scheme(CIRCULAR, TWO_PI * 100.0, TWO_PI * 200.0)
    a = effective_coupling_alpha(s)
    assert abs(a - closed_form_alpha(s)) < 2e-3


def test_extracted_alpha_hh_half():
    a = effective_coupling_alpha(hh_reference(TWO_PI * 200.0), m=0)
    assert abs(a - 0.5) < 2e-3


def test_alpha_rejects_bad_probe():
    s = matched_scheme(CIRCULAR, TWO_PI * 100.0, TWO_PI * 200.0)
    with pytest.raises(ValueError):
        effective_coupling_alpha(s, g_probe=0.0)


# ---- sensitivity bookkeeping ---------------------------------------------------

def test_sensitivity_eta_algebra():
    p = SensitivityParams(alpha=0.2, t2=100.0)
    q = SensitivityParams(alpha=0.4, t2=400.0)
    # doubling alpha and quadrupling T2 improves eta by 4x
    assert np.isclose(sensitivity_eta(p) / sensitivity_eta(q), 4.0)
    # instrument prefactors cancel in ratios
    p2 = SensitivityParams(alpha=0.2, t2=100.0, prefactor_r=2.0,
                           gamma=7.0, readout_c=0.3)
    q2 = SensitivityParams(alpha=0.4, t2=400.0, prefactor_r=2.0,
                           gamma=7.0, readout_c=0.3)
    assert np.isclose(sensitivity_eta(p2) / sensitivity_eta(q2), 4.0)
    assert np.isclose(sensitivity_eta(p),
                      math.sqrt(8.0 / math.e) / (0.2 * 10.0))


# ---- clock constraints ---------------------------------------------------------

def test_clock_circular_magic_point():
    """sqrt(2) ratio makes the compensated detuning exactly 2 omega1."""
    w1 = 37.0
    s = clock_scheme(CIRCULAR, w1)
    assert np.isclose(s.omega2, math.sqrt(2.0) * w1, rtol=1e-14)
    assert np.isclose(s.mod_freq, 2.0 * w1, rtol=1e-14)
    assert np.isclose(control.optimal_detuning(CIRCULAR, w1, s.omega2),
                      s.mod_freq, rtol=1e-14)
    assert CLOCK_CIRCULAR.omega2_ratio == math.sqrt(2.0)


def test_clock_double_drive_ratios():
    w1 = 37.0
    s = clock_scheme(DOUBLE_DRIVE, w1)
    assert np.isclose(s.omega2, 0.03 * w1)
    assert np.isclose(s.mod_freq, w1 + 0.03 * w1 / math.sqrt(2.0))
    assert CLOCK_DOUBLE.omega2_ratio == 0.03
    with pytest.raises(ValueError):
        clock_scheme(SINGLE_DRIVE, w1)


def test_predicted_clock_carrier():
    assert np.isclose(predicted_clock_omega1(0.005), 400.0)
    assert np.isclose(predicted_clock_omega1(0.02, 2.0), 50.0)


# ---- scans ---------------------------------------------------------------------

def test_sensing_scan_single_point_consistency():
    noise = NoiseModel.from_t2_star(1.0, 0.005, 64, 0)
    ws = TWO_PI * 200.0
    res = sensing_scan([TWO_PI * 160.0], ws, noise)
    assert len(res.rows) == len(res.records) == 1
    w1, gain_ci, gain_dd = res.rows[0]
    assert math.isfinite(gain_ci) and gain_ci > 1.0
    assert math.isfinite(gain_dd) and gain_dd > 1.0
    assert gain_ci > gain_dd
    # reference alpha is the single-drive 1/2
    assert abs(res.alpha_ref - 0.5) < 2e-3
    rec = res.records[0][CIRCULAR]
    want = effective_coupling_alpha(
        matched_scheme(CIRCULAR, TWO_PI * 160.0, ws))
    assert np.isclose(rec["alpha"], want, rtol=1e-9)
    # gain formula reconstruction
    g = (rec["alpha"] * math.sqrt(rec["t2"])) \
        / (res.alpha_ref * math.sqrt(res.t2_ref))
    assert np.isclose(g, gain_ci, rtol=1e-12)


def test_sensing_scan_flags_nonlinear_point_nan():
    """Weak-probe double-drive extraction fails the linearity gate."""
    noise = NoiseModel.from_t2_star(1.0, 0.005, 16, 0)
    res = sensing_scan([TWO_PI * 100.0], TWO_PI * 200.0, noise,
                       g_frac_dd=1e-3)
    _, gain_ci, gain_dd = res.rows[0]
    assert math.isfinite(gain_ci)
    assert math.isnan(gain_dd)
    assert "error" in res.records[0][DOUBLE_DRIVE]


def test_clock_comparison_two_point():
    noise = NoiseModel.from_t2_star(1.0, 0.005, 64, 0)
    res = clock_comparison([3.25, 362.0], noise)
    assert len(res.rows) == 2
    # each variant peaks at its own carrier scale
    assert res.omega1_best_dd == 3.25
    assert res.omega1_best_circ == 362.0
    assert res.best_t2_circ > res.best_t2_dd
    assert np.isclose(res.ratio, res.best_t2_circ / res.best_t2_dd)
    # rows agree with direct memory_fidelity calls
    direct = memory_fidelity(clock_scheme(CIRCULAR, 362.0), noise,
                             horizon=3.25 / 0.005)
    assert np.isclose(res.rows[1][2], direct.t2, rtol=1e-12)
