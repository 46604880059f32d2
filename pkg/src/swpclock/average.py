"""Post-selected average clock times for a Gaussian packet.

All averages are k-integrals of the packet's momentum density |A(k)|^2/2pi
weighted by |T|^2 or |R|^2.  The k-range is truncated to
``k0 +- window * dk`` (dk = 1/(2 sigma)) and clipped at k > 0; the mass lost
to the truncation is reported, never silently renormalised.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from .clock import clock_estimate, stationary_dwell
from .model import (
    ATOMIC,
    DoubleDelta,
    GaussianPacket,
    PacketWarning,
    PhysicalParams,
    Potential,
    Rectangular,
    fourier_amplitude,
    initial_right_probability,
)
from .quadrature import QuadratureError, integrate
from .resonance import find_resonances
from .scatter import amplitude_arrays

__all__ = [
    "QuadratureOptions",
    "AverageTimes",
    "SpectralTable",
    "QuadratureError",
    "averaged_times",
    "mean_dwell",
    "spectral_densities",
    "k_window",
]

K_FLOOR = 1e-6
# absolute error floor; a channel that vanishes identically integrates to roundoff (~1e-32)
ABS_FLOOR = 1e-24
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuadratureOptions:
    relTol: float = 1e-9
    window: float = 12.0
    maxDepth: int = 40
    resonanceSplit: bool | None = None  # None: on for DoubleDelta

    def __post_init__(self):
        if not 0 < self.relTol <= 1e-3:
            raise ValueError(f"relTol must lie in (0, 1e-3], got {self.relTol}")
        if not self.window >= 6:
            raise ValueError(f"window must be >= 6 standard deviations, got {self.window}")
        if not self.maxDepth >= 1:
            raise ValueError("maxDepth must be positive")


@dataclass
class AverageTimes:
    avgT: float
    avgR: float
    meanDwell: float
    pT: float
    pR: float
    tFree: float
    errors: dict = field(default_factory=dict)
    excludedMass: float = 0.0
    panels: int = 0

    @property
    def decomposition_residual(self) -> float:
        """|meanDwell - (pT avgT + pR avgR)| / meanDwell."""
        refl = self.pR * self.avgR if self.pR > ABS_FLOOR else 0.0
        return abs(self.meanDwell - (self.pT * self.avgT + refl)) / self.meanDwell


@dataclass
class SpectralTable:
    k: np.ndarray
    rho_inc: np.ndarray
    rho_T: np.ndarray
    rho_R: np.ndarray
    pT: float
    pR: float


def k_window(packet: GaussianPacket, opts: QuadratureOptions):
    """Integration interval and the incident mass falling outside it."""
    w = opts.window * packet.dk
    kmin = max(K_FLOOR, packet.k0 - w)
    kmax = packet.k0 + w
    s = packet.dk * math.sqrt(2.0)
    excluded = 0.5 * erfc((packet.k0 - kmin) / s) + 0.5 * erfc((kmax - packet.k0) / s)
    return kmin, kmax, excluded


def _breakpoints(packet, potential, params, opts, kmin, kmax):
    points = [kmin, kmax]
    split = opts.resonanceSplit
    if split is None:
        split = isinstance(potential, DoubleDelta)
    if split and isinstance(potential, DoubleDelta) and potential.gamma > 0:
        for res in find_resonances(potential.gamma, potential.d, params, kmin, kmax):
            g = res.widthEstimate
            points.extend(p for p in (res.kn - 3 * g, res.kn, res.kn + 3 * g) if kmin < p < kmax)
    if isinstance(potential, Rectangular) and potential.v0 > 0:
        kv = math.sqrt(params.coupling * potential.v0)
        if kmin < kv < kmax:
            points.append(kv)
    return np.unique(points)


def _check_packet(packet, potential):
    if packet.z0 >= potential.clock_window[0]:
        raise ValueError("packet must start to the left of the clock window")
    p = initial_right_probability(packet)
    if p > 1e-9:
        warnings.warn(
            f"initial packet has probability {p:.2e} beyond the origin; asymptotic averages may be biased",
            PacketWarning,
            stacklevel=3,
        )


def _rel(err, val):
    return float(err / abs(val)) if val != 0 else (0.0 if err == 0 else math.inf)


def averaged_times(packet: GaussianPacket, potential: Potential, params: PhysicalParams = ATOMIC,
                   opts: QuadratureOptions | None = None) -> AverageTimes:
    """Average transmission/reflection clock times, channel probabilities
    and the mean dwell time."""
    opts = opts or QuadratureOptions()
    _check_packet(packet, potential)
    kmin, kmax, excluded = k_window(packet, opts)

    def integrand(k):
        rho = np.abs(fourier_amplitude(packet, k)) ** 2 / TWO_PI
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            est = clock_estimate(potential, params, k)
        tT = est.tT
        tR = np.where(est.r_flagged, 0.0, est.tR)
        pt, pr = rho * est.probT, rho * est.probR
        tau = stationary_dwell(potential, params, k)
        return np.array([rho, pt, pr, pt * tT, pr * tR, rho * tau])

    res = integrate(integrand, _breakpoints(packet, potential, params, opts, kmin, kmax),
                    rel_tol=opts.relTol, abs_tol=ABS_FLOOR, max_depth=opts.maxDepth)
    mass, pT, pR, jT, jR, dwell = res.value
    e_mass, e_pT, e_pR, e_jT, e_jR, e_dwell = res.error
    avgT = jT / pT if pT > ABS_FLOOR else math.nan
    avgR = jR / pR if pR > ABS_FLOOR else math.nan
    errors = {
        "pT": _rel(e_pT, pT),
        "pR": _rel(e_pR, pR),
        "avgT": _rel(e_jT, jT) + _rel(e_pT, pT) if pT > ABS_FLOOR else math.nan,
        "avgR": _rel(e_jR, jR) + _rel(e_pR, pR) if pR > ABS_FLOOR else math.nan,
        "meanDwell": _rel(e_dwell, dwell),
        "mass": _rel(e_mass, mass),
    }
    t_free = params.mu * potential.window_length / (params.hbar * packet.k0)
    return AverageTimes(
        avgT=float(avgT), avgR=float(avgR), meanDwell=float(dwell), pT=float(pT), pR=float(pR),
        tFree=t_free, errors=errors, excludedMass=excluded, panels=res.panels,
    )


def mean_dwell(packet: GaussianPacket, potential: Potential, params: PhysicalParams = ATOMIC,
               opts: QuadratureOptions | None = None) -> float:
    """Stationary dwell time averaged over the incident momentum density."""
    opts = opts or QuadratureOptions()
    _check_packet(packet, potential)
    kmin, kmax, _ = k_window(packet, opts)

    def integrand(k):
        rho = np.abs(fourier_amplitude(packet, k)) ** 2 / TWO_PI
        return (rho * stationary_dwell(potential, params, k))[None, :]

    res = integrate(integrand, _breakpoints(packet, potential, params, opts, kmin, kmax),
                    rel_tol=opts.relTol, abs_tol=ABS_FLOOR, max_depth=opts.maxDepth)
    return float(res.value[0])


def spectral_densities(packet: GaussianPacket, potential: Potential, params: PhysicalParams = ATOMIC,
                       kGrid=None, opts: QuadratureOptions | None = None) -> SpectralTable:
    """Incident density |A|^2/2pi and the normalised transmitted/reflected
    densities on ``kGrid``.

    rho_T and rho_R integrate to one over dk on the truncated window;
    rho_T * pT is the un-normalised transmitted spectrum.
    """
    opts = opts or QuadratureOptions()
    k = np.asarray(kGrid, dtype=float)
    if k.ndim != 1 or k.size < 1 or np.any(k <= 0) or np.any(np.diff(k) <= 0):
        raise ValueError("kGrid must be positive and strictly increasing")
    kmin, kmax, _ = k_window(packet, opts)

    def weights(kk):
        rho = np.abs(fourier_amplitude(packet, kk)) ** 2 / TWO_PI
        T, R = amplitude_arrays(potential, params, kk)
        return np.array([rho * np.abs(T) ** 2, rho * np.abs(R) ** 2])

    res = integrate(weights, _breakpoints(packet, potential, params, opts, kmin, kmax),
                    rel_tol=opts.relTol, abs_tol=ABS_FLOOR, max_depth=opts.maxDepth)
    pT, pR = res.value
    rho_inc = np.abs(fourier_amplitude(packet, k)) ** 2 / TWO_PI
    wT, wR = weights(k)
    with np.errstate(invalid="ignore", divide="ignore"):
        rho_T = wT / pT if pT > ABS_FLOOR else np.zeros_like(k)
        rho_R = wR / pR if pR > ABS_FLOOR else np.zeros_like(k)
    return SpectralTable(k=k, rho_inc=rho_inc, rho_T=rho_T, rho_R=rho_R, pT=float(pT), pR=float(pR))
