import math

import numpy as np
import pytest

from swpclock.clock import dwell_double_delta
from swpclock.model import ATOMIC, PhysicalParams
from swpclock.resonance import Resonance, find_resonances, resonance_condition, resonant_dwell
from swpclock.scatter import closed_form_dd_probT

from oracles import brute_force_root_count


def test_reference_resonances():
    res = find_resonances(16, 5, ATOMIC, 0.1, 3.0)
    assert [r.n for r in res] == [1, 2, 3, 4]
    assert np.allclose([r.kn for r in res], [0.62057, 1.24115, 1.86179, 2.48249], atol=1e-5)
    assert all(r.d == 5 for r in res)


def test_roots_are_unit_transmission():
    for gamma, d in [(16, 5), (4, 2), (64, 50), (0.5, 10)]:
        for r in find_resonances(gamma, d, ATOMIC, 0.1, 3.0):
            assert closed_form_dd_probT(gamma, d, ATOMIC, r.kn) > 1 - 1e-10
            g = resonance_condition(gamma, d, ATOMIC, r.kn)
            assert abs(g - r.n * math.pi) < 1e-12


@pytest.mark.parametrize("gamma,d", [(16, 5), (4, 2), (64, 50), (1, 200)])
def test_count_against_dense_scan(gamma, d):
    kmin, kmax = 0.1, 3.0
    assert len(find_resonances(gamma, d, ATOMIC, kmin, kmax)) == brute_force_root_count(gamma, d, kmin, kmax)


def test_sorted_and_within_interval():
    res = find_resonances(16, 50, ATOMIC, 0.5, 1.5)
    k = [r.kn for r in res]
    assert k == sorted(k)
    assert all(0.5 <= x <= 1.5 for x in k)


def test_resonant_dwell_matches_general_dwell():
    for r in find_resonances(16, 5, ATOMIC, 0.1, 3.0):
        assert math.isclose(r.tauDn, dwell_double_delta(16, 5, ATOMIC, r.kn), rel_tol=1e-8)
        assert math.isclose(resonant_dwell(r, 16), r.tauDn, rel_tol=1e-15)
        assert math.isclose(resonant_dwell(r.kn, 16, ATOMIC, d=5), r.tauDn, rel_tol=1e-15)


def test_resonant_dwell_needs_d_for_bare_k():
    with pytest.raises(ValueError):
        resonant_dwell(1.2, 16)


def test_width_estimate_matches_lorentzian():
    r = find_resonances(16, 5, ATOMIC, 1.0, 1.5)[0]
    # half maximum of |T|^2 sits one width away from the peak
    p = closed_form_dd_probT(16, 5, ATOMIC, np.array([r.kn - r.widthEstimate, r.kn + r.widthEstimate]))
    assert np.all(np.abs(p - 0.5) < 0.05)


def test_strong_coupling_limit():
    d = 5.0
    for r in find_resonances(1e6, d, ATOMIC, 0.1, 3.0):
        assert abs(r.kn - r.n * math.pi / d) < 1e-5


def test_weak_coupling_limit():
    # gamma -> 0: arctan term tends to pi/2, k_n -> (n - 1/2) pi / d
    d = 5.0
    for r in find_resonances(1e-8, d, ATOMIC, 0.1, 3.0):
        assert abs(r.kn - (r.n - 0.5) * math.pi / d) < 1e-6


def test_resonant_dwell_asymptote():
    # tau_D(k_n) / gamma^2 settles once gamma is large
    d = 5.0
    vals = []
    for gamma in (1e3, 2e3):
        r = find_resonances(gamma, d, ATOMIC, 1.0, 1.5)[0]
        vals.append(r.tauDn / gamma**2)
    assert abs(vals[1] / vals[0] - 1) < 0.01


def test_units():
    p = PhysicalParams(1.0, 2.0)
    # mu enters through mu gamma / hbar^2
    a = find_resonances(8, 5, p, 0.1, 3.0)
    b = find_resonances(16, 5, ATOMIC, 0.1, 3.0)
    assert np.allclose([r.kn for r in a], [r.kn for r in b], rtol=1e-14)


@pytest.mark.parametrize("args", [(0, 5, 0.1, 3), (16, 0, 0.1, 3), (16, 5, 0, 3), (16, 5, 3, 1), (16, 5, 1, 1)])
def test_invalid_arguments(args):
    gamma, d, lo, hi = args
    with pytest.raises(ValueError):
        find_resonances(gamma, d, ATOMIC, lo, hi)


def test_dataclass_fields():
    r = find_resonances(16, 5, ATOMIC, 1.0, 1.5)[0]
    assert isinstance(r, Resonance)
    assert r.widthEstimate > 0 and r.tauDn > 0
