"""Clock times from the perturbation derivative of the scattering phases.

The clock adds a small constant potential on the clock window; the
transmission (reflection) time is -hbar times the derivative of arg T
(arg R) with respect to it.  Derivatives are central differences on the
argument of amplitude *ratios*, so no phase unwrapping is ever needed, with
one Richardson level (steps h and h/2).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import ATOMIC, DoubleDelta, PhysicalParams, Potential, Rectangular, dispersion_energy
from .scatter import amplitude_arrays, raw_amplitudes

__all__ = [
    "ClockTimes",
    "ClockEstimate",
    "ClockAccuracyWarning",
    "R_FLOOR",
    "clock_estimate",
    "clock_times",
    "clock_time_transmission",
    "clock_time_reflection",
    "dwell_rectangular",
    "dwell_double_delta",
    "dwell_from_wavefunction",
    "stationary_dwell",
    "weighted_relation_residual",
]

# |R| below this leaves arg R undefined; t_R is reported as NaN
R_FLOOR = 1e-12
# relative step against the local energy scale
STEP_FRACTION = 3e-5
# cap on the phase change produced by one step (radians)
MAX_PHASE_STEP = 1e-3
# the +-h phase difference should clear roundoff (~1e-16 rad) by this much
MIN_PHASE_STEP = 1e-7
MAX_STEP_GROWTH = 300.0
TRUNCATION_WARN = 1e-6
MAX_REFINE = 4


class ClockAccuracyWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class ClockTimes:
    k: float
    tT: float
    tR: float
    tauD: float


@dataclass
class ClockEstimate:
    """Vectorised clock-time evaluation with diagnostics.

    ``errT``/``errR`` are the Richardson truncation estimates,
    ``modulus_shift`` the relative change of |T| across the +-h step
    (the first-order theory assumes it is negligible).
    """

    k: np.ndarray
    T: np.ndarray
    R: np.ndarray
    tT: np.ndarray
    tR: np.ndarray
    errT: np.ndarray
    errR: np.ndarray
    step: np.ndarray
    modulus_shift: np.ndarray

    @property
    def probT(self):
        return np.abs(self.T) ** 2

    @property
    def probR(self):
        return np.abs(self.R) ** 2

    @property
    def r_flagged(self):
        return np.abs(self.R) <= R_FLOOR


def _energy_scale(potential: Potential, params: PhysicalParams, k):
    energy = dispersion_energy(params, k)
    scale = energy.copy()
    heights = {h for _, _, h in potential.to_piecewise().segments if h != 0}
    for h in heights:
        scale = np.minimum(scale, np.abs(h - energy))
    return np.maximum(scale, 1e-2 * energy)


def _phase_diff(m21p, m22p, m21m, m22m):
    """arg(T+/T-) and arg(R+/R-) from scaled entries (scale factors are real)."""
    dT = np.angle(m22m * np.conj(m22p))
    dR = np.angle(m21p * m22m * np.conj(m21m * m22p))
    return dT, dR


def _richardson(potential, params, k, h):
    n = k.size
    hbar = params.hbar
    pert = np.concatenate([h, -h, h / 2, -h / 2])
    m21, m22, logs = raw_amplitudes(potential, params, np.tile(k, 4), pert)
    sl = [slice(i * n, (i + 1) * n) for i in range(4)]
    dT1, dR1 = _phase_diff(m21[sl[0]], m22[sl[0]], m21[sl[1]], m22[sl[1]])
    dT2, dR2 = _phase_diff(m21[sl[2]], m22[sl[2]], m21[sl[3]], m22[sl[3]])
    DT1, DT2 = -hbar * dT1 / (2 * h), -hbar * dT2 / h
    DR1, DR2 = -hbar * dR1 / (2 * h), -hbar * dR2 / h
    tT = (4 * DT2 - DT1) / 3
    tR = (4 * DR2 - DR1) / 3
    errT = np.abs(DT2 - DT1) / 3
    errR = np.abs(DR2 - DR1) / 3
    return tT, tR, errT, errR, logs[sl[0]], logs[sl[1]], m22[sl[0]], m22[sl[1]]


def clock_estimate(potential: Potential, params: PhysicalParams, k, step=None) -> ClockEstimate:
    """Clock times t_T(k), t_R(k) for an array of wave numbers.

    ``step`` (energy) overrides the automatic choice; by default it is
    3e-5 of the local energy scale, shrunk where needed so one step moves
    the phase by at most 1e-3 rad (near narrow resonances) and grown, at
    most 300-fold, where t_T is so short that the phase would move by less
    than 1e-7 rad and roundoff would dominate.
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    T, R = amplitude_arrays(potential, params, k)

    if step is None:
        h0 = STEP_FRACTION * _energy_scale(potential, params, k)
        kk = np.concatenate([k, k])
        m21, m22, _ = raw_amplitudes(potential, params, kk, np.concatenate([h0, -h0]))
        n = k.size
        dT, dR = _phase_diff(m21[:n], m22[:n], m21[n:], m22[n:])
        t0 = np.maximum(np.abs(dT), np.abs(np.where(np.abs(R) > R_FLOOR, dR, 0.0))) / (2 * h0)
        grow = np.clip(MIN_PHASE_STEP / np.maximum(np.abs(dT), 1e-300), 1.0, MAX_STEP_GROWTH)
        h = np.minimum(h0 * grow, MAX_PHASE_STEP / np.maximum(t0, 1e-300))
    else:
        h = np.broadcast_to(np.asarray(step, dtype=float), k.shape).copy()
        if np.any(~(h > 0)):
            raise ValueError("step must be positive")

    tT, tR, errT, errR, logp, logm, m22p, m22m = _richardson(potential, params, k, h)
    if step is None:
        # near resonances the phase curves on the scale of the resonance
        # width, which the first-pass slope does not see: shrink h until the
        # Richardson estimate is below TRUNCATION_WARN
        # t_R is ill-conditioned where R passes near zero, so its error is
        # judged by its weight in |T|^2 t_T + |R|^2 t_R
        pT, pR = np.abs(T) ** 2, np.abs(R) ** 2
        for _ in range(MAX_REFINE):
            with np.errstate(invalid="ignore", divide="ignore"):
                rel_r = pR * errR / (pT * np.abs(tT) + pR * np.abs(tR))
                rel = np.maximum(errT / np.abs(tT), np.nan_to_num(rel_r))
            bad = np.flatnonzero(rel > TRUNCATION_WARN)
            if bad.size == 0:
                break
            h[bad] *= np.clip(0.5 * np.sqrt(TRUNCATION_WARN / rel[bad]), 1e-3, 0.5)
            sub = _richardson(potential, params, k[bad], h[bad])
            for full, part in zip((tT, tR, errT, errR, logp, logm, m22p, m22m), sub):
                full[bad] = part

    flagged = np.abs(R) <= R_FLOOR
    tR = np.where(flagged, np.nan, tR)
    errR = np.where(flagged, np.nan, errR)

    modT_p = np.exp(-logp) / np.abs(m22p)
    modT_m = np.exp(-logm) / np.abs(m22m)
    with np.errstate(invalid="ignore", divide="ignore"):
        shift = np.abs(modT_p - modT_m) / np.abs(T)

    with np.errstate(invalid="ignore", divide="ignore"):
        bad = (errT > TRUNCATION_WARN * np.abs(tT)) | (errR > TRUNCATION_WARN * np.abs(tR))
    if np.any(bad):
        warnings.warn(
            f"Richardson estimate exceeds relative {TRUNCATION_WARN:g} at {int(bad.sum())} wave number(s)",
            ClockAccuracyWarning,
            stacklevel=2,
        )
    return ClockEstimate(k=k, T=T, R=R, tT=tT, tR=tR, errT=errT, errR=errR, step=h, modulus_shift=shift)


def _scalar_k(k):
    if not k > 0:
        raise ValueError(f"wave number must be positive, got {k}")
    return float(k)


def clock_time_transmission(potential: Potential, params: PhysicalParams = ATOMIC, k: float = 1.0,
                            step: float | None = None) -> float:
    return float(clock_estimate(potential, params, _scalar_k(k), step).tT[0])


def clock_time_reflection(potential: Potential, params: PhysicalParams = ATOMIC, k: float = 1.0,
                          step: float | None = None) -> float:
    """Reflection clock time; NaN when |R| <= R_FLOOR."""
    return float(clock_estimate(potential, params, _scalar_k(k), step).tR[0])


def clock_times(potential: Potential, params: PhysicalParams = ATOMIC, k: float = 1.0) -> ClockTimes:
    est = clock_estimate(potential, params, _scalar_k(k))
    return ClockTimes(
        k=float(k), tT=float(est.tT[0]), tR=float(est.tR[0]),
        tauD=float(stationary_dwell(potential, params, k)),
    )


# tanh(x)/x = 1 + sum F[n] y^n with y = x^2; G[n] are the coefficients of (f - 1)/y
_TANHX_SERIES = (1.0, -1 / 3, 2 / 15, -17 / 315, 62 / 2835, -1382 / 155925, 21844 / 6081075)
_SERIES_Y = 1e-2


def dwell_rectangular(v0: float, a: float, params: PhysicalParams, k):
    """Stationary dwell time in [0, a] for a rectangular barrier.

    Works below and above the barrier and through E = V0, where the closed
    form is a removable 0/0; near it a series in (q a)^2 is used.
    """
    scalar = np.ndim(k) == 0
    k = np.atleast_1d(np.asarray(k, dtype=float))
    if np.any(~(k > 0)):
        raise ValueError("wave number must be positive")
    q2 = params.coupling * v0 - k * k
    y = q2 * a * a
    pref = 2.0 * params.mu * k / params.hbar
    out = np.empty_like(k)

    mid = np.abs(y) < _SERIES_Y
    below = (~mid) & (y > 0)
    above = (~mid) & (y < 0)

    # |qa| small, or tunnelling: forms regular in q^2
    for mask in (mid, below):
        if not mask.any():
            continue
        kk, qq2, yy = k[mask], q2[mask], y[mask]
        if mask is mid:
            f = np.polyval(_TANHX_SERIES[::-1], yy)
            g = np.polyval(_TANHX_SERIES[:0:-1], yy)
        else:
            qa = np.sqrt(yy)
            f = np.tanh(qa) / qa
            g = (f - 1.0) / yy
        th = a * f
        k2 = kk * kk
        num = k2 * a**3 * g + th + a + a * (k2 - qq2) * th * th
        den = 4.0 * k2 + (qq2 - k2) ** 2 * th * th
        out[mask] = pref[mask] * num / den

    if above.any():
        kk = k[above]
        k1 = np.sqrt(-q2[above])
        sn, cs = np.sin(k1 * a), np.cos(k1 * a)
        k2, k12 = kk * kk, k1 * k1
        num = k1 * a * (k12 + k2) - (k2 - k12) * sn * cs
        den = 4.0 * k12 * k2 * cs * cs + (k12 + k2) ** 2 * sn * sn
        out[above] = pref[above] / k1 * num / den
    return float(out[0]) if scalar else out


def dwell_double_delta(gamma: float, d: float, params: PhysicalParams, k):
    """Stationary dwell time between the two deltas."""
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 0)):
        raise ValueError("wave number must be positive")
    alpha = params.mu * gamma / (params.hbar**2 * k)
    kd = k * d
    num = (1 + 2 * alpha**2) * kd + 2 * alpha * np.sin(kd) ** 2 - alpha**2 * np.sin(2 * kd)
    den = 1 + 4 * alpha**2 * (alpha * np.sin(kd) + np.cos(kd)) ** 2
    out = params.mu / (params.hbar * k * k) * num / den
    return out if out.ndim else float(out)


def dwell_from_wavefunction(potential: Potential, params: PhysicalParams, k: float,
                            nodes: int = 48) -> float:
    """Dwell time (mu / hbar k) * int_window |psi|^2 dz from the stationary
    wavefunction, integrated segment by segment with Gauss-Legendre.

    The wavefunction is propagated from the transmitted side, which is the
    numerically stable direction in evanescent regions.  Intended for
    moderate opacity (q a below a few hundred).
    """
    k = _scalar_k(k)
    el = potential.elements()
    u = params.coupling * el.height
    T, _ = amplitude_arrays(potential, params, np.array([k]))
    T = complex(T[0])
    zl, zr = potential.clock_window
    xg, wg = np.polynomial.legendre.leggauss(nodes)

    def seg(kap2, w):
        # (psi, psi') transfer across width w (negative w goes leftwards)
        kap = np.sqrt(complex(kap2))
        if abs(kap * w) < 1e-8:
            return np.array([[1.0, w], [-kap2 * w, 1.0]], dtype=complex)
        return np.array([[np.cos(kap * w), np.sin(kap * w) / kap],
                         [-kap * np.sin(kap * w), np.cos(kap * w)]], dtype=complex)

    state = T * np.exp(1j * k * el.x_right) * np.array([1.0, 1j * k])
    total = 0.0
    x = el.x_right
    for kind, w, ui, win in zip(el.kind[::-1], el.width[::-1], u[::-1], el.in_window[::-1]):
        if kind == 1:
            state = np.array([state[0], state[1] - ui * state[0]])
            continue
        kap2 = k * k - ui
        if win:
            npan = int(np.ceil(np.sqrt(abs(kap2)) * w / 2.0)) + 1
            edges = np.linspace(0.0, w, npan + 1)
            for lo, hi in zip(edges[:-1], edges[1:]):
                s = 0.5 * (hi - lo) * (xg + 1.0) + lo
                vals = np.array([(seg(kap2, -si) @ state)[0] for si in s])
                total += 0.5 * (hi - lo) * float(np.sum(wg * np.abs(vals) ** 2))
        state = seg(kap2, -w) @ state
        x -= w
    return params.mu / (params.hbar * k) * total


def stationary_dwell(potential: Potential, params: PhysicalParams, k):
    """Dwell time in the clock window: closed forms where they apply,
    otherwise the wavefunction integral."""
    if isinstance(potential, Rectangular) and potential.is_symmetric:
        return dwell_rectangular(potential.v0, potential.a, params, k)
    if isinstance(potential, DoubleDelta) and potential.is_symmetric:
        return dwell_double_delta(potential.gamma, potential.d, params, k)
    if np.ndim(k) == 0:
        return dwell_from_wavefunction(potential, params, k)
    return np.array([dwell_from_wavefunction(potential, params, kk) for kk in np.ravel(k)]).reshape(np.shape(k))


def weighted_relation_residual(potential: Potential, params: PhysicalParams = ATOMIC, k=1.0):
    """|tau_D - (|T|^2 t_T + |R|^2 t_R)| / tau_D.

    Where |R| <= R_FLOOR the reflection term is dropped.
    """
    est = clock_estimate(potential, params, k)
    tau = np.atleast_1d(stationary_dwell(potential, params, est.k))
    refl = np.where(est.r_flagged, 0.0, est.probR * np.nan_to_num(est.tR))
    res = np.abs(tau - (est.probT * est.tT + refl)) / tau
    return res if np.ndim(k) else float(res[0])
