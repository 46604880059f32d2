"""Transmission resonances of the double delta barrier.

Resonances are the roots of g(k) = k d + arctan(hbar^2 k / (mu gamma)) = n pi.
g is strictly increasing and g((n - 1/2) pi / d) < n pi < g(n pi / d), so each
branch n owns exactly one root in that bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ATOMIC, PhysicalParams
from .scatter import closed_form_dd_probT

__all__ = ["Resonance", "find_resonances", "resonant_dwell", "resonance_condition"]


@dataclass(frozen=True)
class Resonance:
    n: int
    kn: float
    tauDn: float
    widthEstimate: float
    d: float


def resonance_condition(gamma: float, d: float, params: PhysicalParams, k):
    """g(k) = k d + arctan(hbar^2 k / (mu gamma))."""
    return k * d + np.arctan(params.hbar**2 * k / (params.mu * gamma))


def _bisect(func, lo, hi):
    flo = func(lo)
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return mid
        fm = func(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid


def resonant_dwell(resonance: Resonance | float, gamma: float, params: PhysicalParams = ATOMIC,
                   d: float | None = None) -> float:
    """Dwell time at a resonance, from the closed form obtained by
    substituting the resonance condition into the dwell time.

    ``d`` is required when a bare wave number is passed.
    """
    if isinstance(resonance, Resonance):
        kn = resonance.kn
        d = resonance.d if d is None else d
    else:
        kn = float(resonance)
        if d is None:
            raise ValueError("d is required with a bare wave number")
    hb, mu = params.hbar, params.mu
    b = mu * gamma / hb**2
    return mu / (hb * kn**3) * (2 * b + (2 * b * b + kn * kn) * d)


def _width(gamma, d, params, kn):
    h = 1e-6 * kn
    f = closed_form_dd_probT(gamma, d, params, np.array([kn - h, kn, kn + h]))
    curv = abs(f[0] - 2 * f[1] + f[2]) / (h * h)
    if curv == 0:
        return h
    return math.sqrt(2.0 / curv)


def find_resonances(gamma: float, d: float, params: PhysicalParams = ATOMIC,
                    kMin: float = 0.0, kMax: float = 1.0) -> list[Resonance]:
    """All resonances with kMin <= k_n <= kMax, in increasing order."""
    if not (gamma > 0 and d > 0):
        raise ValueError(f"need gamma > 0 and d > 0, got gamma={gamma}, d={d}")
    if not (0 < kMin < kMax):
        raise ValueError(f"invalid interval [{kMin}, {kMax}]")

    def g(k):
        return resonance_condition(gamma, d, params, k)

    out = []
    n_lo = max(1, math.floor(kMin * d / math.pi))
    n_hi = math.ceil(kMax * d / math.pi) + 1
    for n in range(n_lo, n_hi + 1):
        lo, hi = (n - 0.5) * math.pi / d, n * math.pi / d
        if hi < kMin or lo > kMax:
            continue
        kn = _bisect(lambda k: g(k) - n * math.pi, lo, hi)
        if not kMin <= kn <= kMax:
            continue
        out.append(Resonance(n=n, kn=kn, tauDn=resonant_dwell(kn, gamma, params, d=d),
                             widthEstimate=_width(gamma, d, params, kn), d=d))
    return out
