import math
import warnings

import mpmath as mp
import numpy as np
import pytest

from swpclock.clock import (
    ClockAccuracyWarning,
    clock_estimate,
    clock_time_reflection,
    clock_time_transmission,
    clock_times,
    dwell_double_delta,
    dwell_from_wavefunction,
    dwell_rectangular,
    stationary_dwell,
    weighted_relation_residual,
)
from swpclock.model import ATOMIC, DoubleDelta, PhysicalParams, Piecewise, Rectangular

from oracles import dd_dwell_mp, ode_dwell, rect_clock_mp, rect_dwell_mp

RECT = Rectangular(0.5, 10)
DD = DoubleDelta(16, 5)


@pytest.mark.parametrize("k", [0.3, 0.7, 0.95, 1.3, 2.0])
def test_rect_clock_against_extended_precision(k):
    ref = float(rect_clock_mp(0.5, 10, k))
    assert abs(clock_time_transmission(RECT, ATOMIC, k) - ref) < 1e-6 * abs(ref)


@pytest.mark.parametrize("k", [0.1, 0.45, 0.7, 0.99, 1.0, 1.01, 1.5, 2.8])
def test_dwell_rectangular_closed_form(k):
    assert math.isclose(dwell_rectangular(0.5, 10, ATOMIC, k), rect_dwell_mp(0.5, 10, k if k != 1.0 else 1 + 1e-12),
                        rel_tol=1e-9)


def test_dwell_rectangular_series_region():
    # through E = V0 the series and the closed forms must join smoothly
    kv = 1.0
    k = kv + np.array([-2e-3, -1e-3, -1e-4, 0.0, 1e-4, 1e-3, 2e-3])
    got = dwell_rectangular(0.5, 10, ATOMIC, k)
    with mp.workdps(40):
        ref = np.array([rect_dwell_mp(0.5, 10, mp.mpf(kk) + (mp.mpf("1e-25") if kk == kv else 0)) for kk in k])
    assert np.max(np.abs(got / ref - 1)) < 1e-12


def test_dwell_double_delta_closed_form():
    for k in (0.3, 0.62057, 1.2, 2.2):
        assert math.isclose(dwell_double_delta(16, 5, ATOMIC, k), dd_dwell_mp(16, 5, k), rel_tol=1e-12)


@pytest.mark.parametrize("pot,segs,dels", [
    (RECT, [(0, 10, 0.5)], []),
    (DD, [(0, 5, 0.0)], [(0, 16), (5, 16)]),
])
def test_dwell_against_ode_wavefunction(pot, segs, dels):
    for k in (0.5, 1.1):
        ref = ode_dwell(segs, dels, pot.clock_window, k)
        assert math.isclose(stationary_dwell(pot, ATOMIC, k), ref, rel_tol=1e-8)
        assert math.isclose(dwell_from_wavefunction(pot, ATOMIC, k), ref, rel_tol=1e-8)


def test_symmetric_identity():
    for pot in (RECT, DD):
        k = np.linspace(0.2, 2.5, 40)
        est = clock_estimate(pot, ATOMIC, k)
        tau = stationary_dwell(pot, ATOMIC, k)
        assert np.max(np.abs(est.tT / tau - 1)) < 1e-6
        assert np.max(np.abs(est.tR / tau - 1)) < 1e-6


def test_free_clock():
    pot = Rectangular(0.0, 7.0)
    for k in (0.3, 1.0, 2.0):
        t = clock_times(pot, ATOMIC, k)
        assert math.isclose(t.tT, 7.0 / k, rel_tol=1e-10)
        assert math.isclose(t.tauD, 7.0 / k, rel_tol=1e-12)
        assert math.isnan(t.tR)
        assert weighted_relation_residual(pot, ATOMIC, k) < 1e-10


def test_units_scaling():
    # mu a / (hbar k) for the free clock in non-atomic units
    p = PhysicalParams(2.0, 3.0)
    assert math.isclose(clock_time_transmission(Rectangular(0.0, 4.0), p, 0.5), 3.0 * 4.0 / (2.0 * 0.5),
                        rel_tol=1e-10)


def test_relation_asymmetric():
    pw = Piecewise(segments=[(0, 1.5, 0.8), (1.5, 4, 0.2), (4, 5, 1.1)], deltas=[(2.5, 0.7)])
    k = np.array([0.4, 0.9, 1.3, 1.8])
    assert np.max(weighted_relation_residual(pw, ATOMIC, k)) < 1e-6
    est = clock_estimate(pw, ATOMIC, k)
    # not symmetric, so the channel times differ
    assert np.max(np.abs(est.tT - est.tR) / np.abs(est.tT)) > 1e-3


def test_relation_subwindow():
    pot = Rectangular(0.5, 10, clock_window=(2.0, 6.0))
    k = np.array([0.5, 0.8, 1.2])
    assert np.max(weighted_relation_residual(pot, ATOMIC, k)) < 1e-6


def test_step_halving_converges():
    k = 0.7
    ref = float(rect_clock_mp(0.5, 10, k))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ClockAccuracyWarning)
        e1 = abs(clock_time_transmission(RECT, ATOMIC, k, step=1e-2) - ref)
        e2 = abs(clock_time_transmission(RECT, ATOMIC, k, step=5e-3) - ref)
    # Richardson leaves a fourth-order truncation error
    assert 12 < e1 / e2 < 20


def test_default_step_beats_reference_step():
    k = np.linspace(0.2, 2.5, 60)
    est = clock_estimate(DD, ATOMIC, k)
    tau = stationary_dwell(DD, ATOMIC, k)
    assert np.max(np.abs(est.tT / tau - 1)) < 1e-7
    assert np.all(est.errT < 1e-6 * np.abs(est.tT))


def test_modulus_shift_small():
    est = clock_estimate(RECT, ATOMIC, np.array([0.5, 0.7, 1.2]))
    assert np.all(est.modulus_shift < 1e-3)


def test_hartman_saturation():
    k, v0 = 0.7, 0.5
    q = math.sqrt(2 * v0 - k * k)
    limit = 2 * k / (q * (k * k + q * q))
    t200 = dwell_rectangular(v0, 200, ATOMIC, k)
    t400 = dwell_rectangular(v0, 400, ATOMIC, k)
    assert abs(t200 - limit) / t200 < 1e-8
    assert abs(t200 - t400) / t200 < 1e-10
    assert abs(clock_time_transmission(Rectangular(v0, 200), ATOMIC, k) - limit) / limit < 1e-6


def test_delta_strength_doubling():
    # off resonance tau_D falls as gamma^-2
    k, d = 1.2, 5.0
    r = dwell_double_delta(512, d, ATOMIC, k) / dwell_double_delta(256, d, ATOMIC, k)
    assert abs(r / 0.25 - 1) < 0.05


def test_reflection_flagged_when_r_vanishes():
    # zero-strength deltas: R = 0 identically
    pot = DoubleDelta(0.0, 5.0)
    assert math.isnan(clock_time_reflection(pot, ATOMIC, 1.0))
    est = clock_estimate(pot, ATOMIC, np.array([0.5, 1.0]))
    assert np.all(est.r_flagged)


def test_explicit_large_step_warns():
    with pytest.warns(ClockAccuracyWarning):
        clock_time_transmission(DD, ATOMIC, 1.2411, step=1e-2)


def test_default_step_does_not_warn():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        clock_estimate(DD, ATOMIC, np.linspace(0.1, 3.0, 300))
        clock_estimate(RECT, ATOMIC, np.linspace(0.1, 3.0, 300))


def test_invalid_k():
    with pytest.raises(ValueError):
        clock_time_transmission(RECT, ATOMIC, 0.0)
    with pytest.raises(ValueError):
        dwell_rectangular(0.5, 10, ATOMIC, -1.0)
