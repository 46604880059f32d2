"""Stationary scattering amplitudes from a transfer-matrix engine.

The engine propagates the pair (psi, psi') across each constant segment and
delta of a :class:`~swpclock.model.Potential`, then converts to plane-wave
amplitudes at the outer edges.  For a real potential every segment matrix is
real; evanescent segments are rescaled by exp(-q w) and the scale is carried
in log form, so opaque barriers (q a of several hundred) neither overflow
nor underflow until T itself is formed.

Conventions: left of the potential psi = exp(ikz) + R exp(-ikz), right of it
psi = T exp(ikz), with the same global origin on both sides.
"""

from __future__ import annotations

import functools
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import ATOMIC, PhysicalParams, Potential, dispersion_energy

__all__ = [
    "ScatteringError",
    "ScatteringResult",
    "TransferMatrix",
    "amplitudes",
    "amplitude_arrays",
    "raw_amplitudes",
    "amplitudes_from_right",
    "closed_form_dd_probT",
    "delta_matching_matrix",
    "propagation_matrix",
]


class ScatteringError(ArithmeticError):
    """Transfer-matrix assembly degenerated."""


@dataclass(frozen=True)
class ScatteringResult:
    k: float
    T: complex
    R: complex

    @property
    def phiT(self) -> float:
        return math.atan2(self.T.imag, self.T.real)

    @property
    def phiR(self) -> float:
        return math.atan2(self.R.imag, self.R.real)

    @property
    def probT(self) -> float:
        return abs(self.T) ** 2

    @property
    def probR(self) -> float:
        return abs(self.R) ** 2


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 map of (right-going, left-going) plane-wave amplitudes."""

    m: np.ndarray

    def __matmul__(self, other: "TransferMatrix") -> "TransferMatrix":
        return TransferMatrix(self.m @ other.m)

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.m))

    @property
    def transmission(self) -> complex:
        return self.det / self.m[1, 1]

    @property
    def reflection(self) -> complex:
        return -self.m[1, 0] / self.m[1, 1]


@functools.lru_cache(maxsize=256)
def _elements(potential: Potential, params: PhysicalParams):
    el = potential.elements()
    return el, params.coupling * el.height


def _check_k(k):
    k = np.asarray(k, dtype=float)
    if np.any(~(k > 0)):
        raise ValueError("wave number must be positive")
    return k


def raw_amplitudes(potential: Potential, params: PhysicalParams, k, perturbation=0.0):
    """Scaled matrix entries ``(m21, m22, logscale)`` for arrays of k.

    ``perturbation`` (energy, scalar or per-k array) is added on the clock
    window.  T = exp(-logscale)/m22, R = -m21/m22.
    """
    k = _check_k(k)
    el, u = _elements(potential, params)
    du = params.coupling * np.broadcast_to(np.asarray(perturbation, dtype=float), k.shape)
    m21, m22, logscale = kernels.transfer_amplitudes(
        k.ravel(), du.ravel(), el.kind, el.width, u, el.in_window, el.x_left, el.x_right
    )
    if np.any(m22 == 0) or not np.all(np.isfinite(m22)):
        raise ScatteringError("transfer matrix is numerically singular (M22 = 0 or non-finite)")
    return m21.reshape(k.shape), m22.reshape(k.shape), logscale.reshape(k.shape)


def amplitude_arrays(potential: Potential, params: PhysicalParams, k, perturbation=0.0):
    """T(k) and R(k) as complex arrays."""
    m21, m22, logscale = raw_amplitudes(potential, params, k, perturbation)
    return np.exp(-logscale) / m22, -m21 / m22


def _warn_large_perturbation(potential, params, k, perturbation):
    if perturbation == 0:
        return
    energy = float(dispersion_energy(params, k))
    gap = abs(potential.max_height() - energy) if potential.max_height() > 0 else energy
    if abs(perturbation) > 1e-2 * min(energy, gap):
        warnings.warn(
            f"perturbation {perturbation:g} is not small against E={energy:g} / |V-E|={gap:g}",
            RuntimeWarning,
            stacklevel=3,
        )


def amplitudes(potential: Potential, params: PhysicalParams = ATOMIC, k: float = 1.0,
               perturbation: float = 0.0) -> ScatteringResult:
    """Exact stationary amplitudes at a single wave number."""
    if not k > 0:
        raise ValueError(f"wave number must be positive, got {k}")
    _warn_large_perturbation(potential, params, k, perturbation)
    T, R = amplitude_arrays(potential, params, np.array([k]), perturbation)
    return ScatteringResult(k=float(k), T=complex(T[0]), R=complex(R[0]))


def amplitudes_from_right(potential: Potential, params: PhysicalParams, k: float) -> ScatteringResult:
    """Amplitudes for incidence from the right, by mirroring the potential."""
    return amplitudes(potential.to_piecewise().mirrored(), params, k)


def closed_form_dd_probT(gamma: float, d: float, params: PhysicalParams, k):
    """|T|^2 of the double delta barrier in closed form."""
    k = _check_k(k)
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    alpha = params.mu * gamma / (params.hbar**2 * k)
    bracket = alpha * np.sin(k * d) + np.cos(k * d)
    out = 1.0 / (1.0 + 4.0 * alpha**2 * bracket**2)
    return out if out.ndim else float(out)


def delta_matching_matrix(strength: float, params: PhysicalParams, k: float) -> TransferMatrix:
    """Amplitude transfer across ``strength * delta(z)`` at the local origin.

    From the derivative jump psi'(0+) - psi'(0-) = (2 mu gamma / hbar^2) psi(0).
    """
    if not k > 0:
        raise ValueError(f"wave number must be positive, got {k}")
    x = params.coupling * strength / (2j * k)
    return TransferMatrix(np.array([[1 + x, x], [-x, 1 - x]], dtype=complex))


def propagation_matrix(k: float, length: float) -> TransferMatrix:
    """Shift of the amplitude reference point by ``length`` in free space."""
    return TransferMatrix(np.diag([np.exp(1j * k * length), np.exp(-1j * k * length)]))
