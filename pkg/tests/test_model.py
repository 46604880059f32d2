import math
import warnings

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.special import erfc

from swpclock.model import (
    ATOMIC,
    DoubleDelta,
    GaussianPacket,
    PacketWarning,
    PhysicalParams,
    Piecewise,
    Rectangular,
    dispersion_energy,
    fourier_amplitude,
    initial_right_probability,
)

from oracles import fourier_dft

FIG1 = GaussianPacket(0.7, 10.0, -80.0)


def test_atomic_units_default():
    p = PhysicalParams()
    assert p.hbar == 1.0 and p.mu == 1.0
    assert ATOMIC == p
    assert p.coupling == 2.0


@pytest.mark.parametrize("hbar,mu", [(0, 1), (1, 0), (-1, 1), (1, -2)])
def test_params_must_be_positive(hbar, mu):
    with pytest.raises(ValueError):
        PhysicalParams(hbar, mu)


def test_default_clock_windows():
    assert Rectangular(0.5, 10).clock_window == (0.0, 10.0)
    assert DoubleDelta(16, 5).clock_window == (0.0, 5.0)
    assert Rectangular(0.5, 10, clock_window=(2, 3)).clock_window == (2.0, 3.0)


@pytest.mark.parametrize("bad", [
    lambda: Rectangular(0.5, 0),
    lambda: Rectangular(-0.1, 1),
    lambda: DoubleDelta(16, -1),
    lambda: DoubleDelta(-1, 5),
    lambda: Rectangular(0.5, 10, clock_window=(3, 3)),
    lambda: Piecewise(segments=[(0, 2, 1), (1, 3, 1)]),
    lambda: Piecewise(segments=[(2, 1, 1)]),
    lambda: Piecewise(),
])
def test_invalid_potentials(bad):
    with pytest.raises(ValueError):
        bad()


def test_piecewise_sorts_and_elements():
    pw = Piecewise(segments=[(2, 3, 0.5), (0, 1, 1.0)], deltas=[(1.5, 2.0)])
    assert pw.segments[0] == (0.0, 1.0, 1.0)
    el = pw.elements()
    assert el.x_left == 0 and el.x_right == 3
    # widths of the constant pieces cover the support exactly
    assert math.isclose(el.width[el.kind == 0].sum(), 3.0)
    assert list(el.kind).count(1) == 1


def test_symmetry_flags():
    assert Rectangular(0.5, 10).is_symmetric
    assert DoubleDelta(16, 5).is_symmetric
    assert not Rectangular(0.5, 10, clock_window=(0, 4)).is_symmetric
    asym = Piecewise(segments=[(0, 1, 1.0), (1, 3, 0.2)])
    assert not asym.is_symmetric
    assert Piecewise(segments=[(0, 1, 1.0), (1, 2, 1.0)]).is_symmetric


def test_packet_validation_and_warning():
    with pytest.raises(ValueError):
        GaussianPacket(0.7, 10, 5)
    with pytest.raises(ValueError):
        GaussianPacket(0, 10, -80)
    with pytest.warns(PacketWarning):
        GaussianPacket(0.3, 10, -80)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        GaussianPacket(0.7, 10, -80)


def test_fourier_amplitude_at_centre():
    a = fourier_amplitude(FIG1, 0.7)
    assert math.isclose(abs(a), (8 * math.pi) ** 0.25 * math.sqrt(10), rel_tol=1e-15)
    assert np.angle(a) == 0.0


def test_fourier_amplitude_matches_dft():
    k = np.linspace(FIG1.k0 - 5 / FIG1.sigma, FIG1.k0 + 5 / FIG1.sigma, 21)
    ref = fourier_dft(FIG1, k)
    got = fourier_amplitude(FIG1, k)
    assert np.max(np.abs(got - ref)) / np.max(np.abs(got)) < 1e-8


@pytest.mark.parametrize("packet", [FIG1, GaussianPacket(1.2, 6, -48), GaussianPacket(1.2, 20, -160)])
def test_momentum_density_normalised(packet):
    w = 15 * packet.dk
    val, _ = quad(lambda k: abs(fourier_amplitude(packet, k)) ** 2 / (2 * math.pi),
                  packet.k0 - w, packet.k0 + w, epsabs=0, epsrel=1e-13, limit=200)
    assert abs(val - 1) < 1e-10


def test_momentum_std():
    p = GaussianPacket(1.2, 6, -48)
    k = np.linspace(p.k0 - 12 * p.dk, p.k0 + 12 * p.dk, 20001)
    rho = np.abs(fourier_amplitude(p, k)) ** 2 / (2 * math.pi)
    mean = np.trapezoid(k * rho, k)
    var = np.trapezoid((k - mean) ** 2 * rho, k)
    assert math.isclose(mean, p.k0, rel_tol=1e-12)
    assert math.isclose(math.sqrt(var), 1 / (2 * p.sigma), rel_tol=1e-9)


def test_wavefunction_norm():
    z = np.linspace(-200, 40, 200001)
    assert abs(np.trapezoid(np.abs(FIG1.wavefunction(z)) ** 2, z) - 1) < 1e-12


def test_dispersion_energy():
    assert dispersion_energy(ATOMIC, 0.0) == 0.0
    assert dispersion_energy(ATOMIC, 1.0) == 0.5
    assert math.isclose(dispersion_energy(ATOMIC, 0.7), 0.245)
    assert math.isclose(dispersion_energy(PhysicalParams(2.0, 4.0), 1.0), 0.5)


def test_initial_right_probability():
    p = initial_right_probability(FIG1)
    assert p < 1e-15
    assert math.isclose(p, 0.5 * erfc(8 / math.sqrt(2)), rel_tol=1e-14)
    # quadrature of |Phi|^2 over z > 0
    val, _ = quad(lambda z: abs(FIG1.wavefunction(z)) ** 2, 0, 200, epsabs=0, epsrel=1e-10)
    assert math.isclose(p, val, rel_tol=1e-8)
    assert initial_right_probability(GaussianPacket(0.7, 10, -1e4)) == 0.0


def test_initial_right_probability_monotone():
    ps = [initial_right_probability(GaussianPacket(0.7, 10, z)) for z in (-10, -20, -40, -80)]
    assert all(a > b for a, b in zip(ps, ps[1:]))
    ps = [initial_right_probability(GaussianPacket(1.2, s, -40)) for s in (20, 10, 5)]
    assert all(a > b for a, b in zip(ps, ps[1:]))
