"""Physical parameters, barrier potentials and the Gaussian wave packet.

Everything here is immutable.  Potentials are reduced to a flat list of
"elements" (constant segments and point deltas) that the transfer-matrix
kernels consume; see :meth:`Potential.elements`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

__all__ = [
    "PhysicalParams",
    "ATOMIC",
    "Potential",
    "Rectangular",
    "DoubleDelta",
    "Piecewise",
    "Elements",
    "GaussianPacket",
    "PacketWarning",
    "fourier_amplitude",
    "dispersion_energy",
    "initial_right_probability",
]


class PacketWarning(UserWarning):
    """The packet violates an assumption the averages rely on."""


@dataclass(frozen=True)
class PhysicalParams:
    """Unit system: reduced Planck constant and particle mass."""

    hbar: float = 1.0
    mu: float = 1.0

    def __post_init__(self):
        if not (self.hbar > 0 and self.mu > 0):
            raise ValueError(f"hbar and mu must be positive, got {self.hbar}, {self.mu}")

    @property
    def coupling(self) -> float:
        """2*mu/hbar**2, converts an energy into a squared wave number."""
        return 2.0 * self.mu / self.hbar**2


ATOMIC = PhysicalParams()


@dataclass(frozen=True)
class Elements:
    """Flattened potential, left to right.

    ``kind[i]`` is 0 for a constant segment of ``width[i]`` and height
    ``height[i]``, 1 for a point delta of strength ``height[i]`` (energy x
    length).  ``in_window[i]`` marks segments that receive the clock
    perturbation.  ``x_left``/``x_right`` are the outer edges.
    """

    kind: np.ndarray
    width: np.ndarray
    height: np.ndarray
    in_window: np.ndarray
    x_left: float
    x_right: float


class Potential:
    """Base class for static one-dimensional potentials with a clock window."""

    clock_window: tuple[float, float]

    def to_piecewise(self) -> "Piecewise":
        raise NotImplementedError

    def elements(self) -> Elements:
        return self.to_piecewise().elements()

    @property
    def window_length(self) -> float:
        zl, zr = self.clock_window
        return zr - zl

    @property
    def is_symmetric(self) -> bool:
        return self.to_piecewise().is_symmetric

    def max_height(self) -> float:
        pw = self.to_piecewise()
        return max([h for _, _, h in pw.segments] + [0.0])


def _check_window(window):
    zl, zr = (float(w) for w in window)
    if not zr > zl:
        raise ValueError(f"clock window must have positive length, got {window}")
    return zl, zr


@dataclass(frozen=True)
class Piecewise(Potential):
    """Stack of constant segments ``(start, end, height)`` plus point deltas
    ``(position, strength)``.  The potential vanishes outside the segments."""

    segments: tuple = ()
    deltas: tuple = ()
    clock_window: tuple = None

    def __post_init__(self):
        segs = tuple(sorted((float(s), float(e), float(h)) for s, e, h in self.segments))
        for s, e, _ in segs:
            if not e > s:
                raise ValueError(f"segment ({s}, {e}) has non-positive extent")
        for (_, e0, _), (s1, _, _) in zip(segs, segs[1:]):
            if s1 < e0:
                raise ValueError("segments overlap")
        dels = tuple(sorted((float(p), float(g)) for p, g in self.deltas))
        if not segs and not dels:
            raise ValueError("empty potential")
        object.__setattr__(self, "segments", segs)
        object.__setattr__(self, "deltas", dels)
        if self.clock_window is None:
            points = [x for s, e, _ in segs for x in (s, e)] + [p for p, _ in dels]
            window = (min(points), max(points))
        else:
            window = self.clock_window
        object.__setattr__(self, "clock_window", _check_window(window))

    def to_piecewise(self):
        return self

    def height_at(self, z: float) -> float:
        return sum(h for s, e, h in self.segments if s <= z < e)

    def elements(self) -> Elements:
        zl, zr = self.clock_window
        points = {zl, zr}
        for s, e, _ in self.segments:
            points.update((s, e))
        points.update(p for p, _ in self.deltas)
        edges = sorted(points)
        strength = {}
        for p, g in self.deltas:
            strength[p] = strength.get(p, 0.0) + g

        kind, width, height, win = [], [], [], []
        for i, x in enumerate(edges):
            if x in strength:
                kind.append(1)
                width.append(0.0)
                height.append(strength[x])
                win.append(False)
            if i + 1 < len(edges):
                x1 = edges[i + 1]
                mid = 0.5 * (x + x1)
                kind.append(0)
                width.append(x1 - x)
                height.append(self.height_at(mid))
                win.append(zl <= mid <= zr)
        return Elements(
            kind=np.asarray(kind, dtype=np.int32),
            width=np.asarray(width, dtype=float),
            height=np.asarray(height, dtype=float),
            in_window=np.asarray(win, dtype=bool),
            x_left=edges[0],
            x_right=edges[-1],
        )

    def mirrored(self) -> "Piecewise":
        """Reflection z -> c - z about the centre c of the support."""
        el = self.elements()
        c = el.x_left + el.x_right
        zl, zr = self.clock_window
        return Piecewise(
            segments=[(c - e, c - s, h) for s, e, h in self.segments],
            deltas=[(c - p, g) for p, g in self.deltas],
            clock_window=(c - zr, c - zl),
        )

    @property
    def is_symmetric(self) -> bool:
        m = self.mirrored()
        return (
            np.allclose([x for seg in m.segments for x in seg], [x for seg in self.segments for x in seg])
            and np.allclose([x for d in m.deltas for x in d], [x for d in self.deltas for x in d])
            and np.allclose(m.clock_window, self.clock_window)
        )


@dataclass(frozen=True)
class Rectangular(Potential):
    """Barrier of height ``v0`` on ``[0, a]``.

    ``v0 = 0`` is accepted and gives the free particle with a clock on
    ``[0, a]``.
    """

    v0: float
    a: float
    clock_window: tuple = None

    def __post_init__(self):
        if self.v0 < 0 or not self.a > 0:
            raise ValueError(f"need v0 >= 0 and a > 0, got v0={self.v0}, a={self.a}")
        window = (0.0, float(self.a)) if self.clock_window is None else self.clock_window
        object.__setattr__(self, "clock_window", _check_window(window))

    def to_piecewise(self):
        return Piecewise(segments=[(0.0, self.a, self.v0)], clock_window=self.clock_window)

    @property
    def is_symmetric(self) -> bool:
        return self.clock_window == (0.0, float(self.a))

    def max_height(self) -> float:
        return float(self.v0)


@dataclass(frozen=True)
class DoubleDelta(Potential):
    """``gamma*delta(z) + gamma*delta(z - d)``, clock between the deltas."""

    gamma: float
    d: float
    clock_window: tuple = None

    def __post_init__(self):
        if self.gamma < 0 or not self.d > 0:
            raise ValueError(f"need gamma >= 0 and d > 0, got gamma={self.gamma}, d={self.d}")
        window = (0.0, float(self.d)) if self.clock_window is None else self.clock_window
        object.__setattr__(self, "clock_window", _check_window(window))

    def to_piecewise(self):
        return Piecewise(
            segments=[(0.0, self.d, 0.0)],
            deltas=[(0.0, self.gamma), (self.d, self.gamma)],
            clock_window=self.clock_window,
        )

    @property
    def is_symmetric(self) -> bool:
        return self.clock_window == (0.0, float(self.d))

    def max_height(self) -> float:
        return 0.0


@dataclass(frozen=True)
class GaussianPacket:
    """Right-moving Gaussian packet with mean wave number ``k0``, spatial
    width ``sigma`` and centre ``z0 < 0``."""

    k0: float
    sigma: float
    z0: float

    def __post_init__(self):
        if not (self.k0 > 0 and self.sigma > 0):
            raise ValueError(f"need k0 > 0 and sigma > 0, got k0={self.k0}, sigma={self.sigma}")
        if not self.z0 < 0:
            raise ValueError(f"packet must start left of the origin, got z0={self.z0}")
        if self.k0 * self.sigma < 5:
            warnings.warn(
                f"k0*sigma = {self.k0 * self.sigma:.3g} < 5: the k<0 tail of |A(k)|^2 is not negligible",
                PacketWarning,
                stacklevel=2,
            )

    @property
    def dk(self) -> float:
        """Standard deviation of |A(k)|^2."""
        return 0.5 / self.sigma

    def wavefunction(self, z):
        """Initial wave function Phi(z, 0)."""
        z = np.asarray(z, dtype=float)
        norm = (2.0 * math.pi) ** -0.25 / math.sqrt(self.sigma)
        return norm * np.exp(1j * self.k0 * z - (z - self.z0) ** 2 / (4.0 * self.sigma**2))


def fourier_amplitude(packet: GaussianPacket, k):
    """Momentum amplitude A(k) with Phi(z,0) = int dk/2pi A(k) exp(ikz)."""
    k = np.asarray(k, dtype=float)
    dk = k - packet.k0
    amp = (8.0 * math.pi) ** 0.25 * math.sqrt(packet.sigma)
    return amp * np.exp(-(packet.sigma * dk) ** 2 - 1j * dk * packet.z0)


def dispersion_energy(params: PhysicalParams, k):
    return params.hbar**2 * np.asarray(k, dtype=float) ** 2 / (2.0 * params.mu)


def initial_right_probability(packet: GaussianPacket) -> float:
    """Probability of finding the initial packet at z > 0."""
    return 0.5 * float(erfc(abs(packet.z0) / (packet.sigma * math.sqrt(2.0))))
