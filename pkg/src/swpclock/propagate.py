"""Time-dependent oracle: Crank-Nicolson propagation of the initial packet.

The packet is sampled on a uniform grid with hard walls and advanced with
the Cayley form (1 + i dt H / 2hbar) psi' = (1 - i dt H / 2hbar) psi, which is
unitary for the discrete Hamiltonian.  Segments enter as cell-averaged
heights, deltas as a single cell of height gamma/dz at the nearest node.
After ``tMax`` the mass right of the clock window is the transmission
probability, the mass left of it the reflection probability.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import erfc

from . import kernels
from .model import ATOMIC, GaussianPacket, PhysicalParams, Potential, dispersion_energy

__all__ = [
    "Grid1D",
    "PropagationReport",
    "PropagationError",
    "AsymptoticConditionError",
    "discretize",
    "evolve",
    "snapshot_density",
    "write_snapshot_csv",
    "significant_k_max",
]

MIN_POINTS = 2**10
RESOLUTION = 0.1
CONTAINMENT = 1e-12
DT_LIMIT = 0.5
P_INSIDE_MAX = 1e-3
BOUNDARY_MAX = 1e-10
K_SIGMAS = 6.0


class PropagationError(RuntimeError):
    """Grid or time step unsuitable, or density reached the walls."""


class AsymptoticConditionError(PropagationError):
    """Too much probability left inside the clock window at tMax."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Grid1D:
    zMin: float
    zMax: float
    nPoints: int

    def __post_init__(self):
        if not self.zMax > self.zMin:
            raise ValueError(f"need zMax > zMin, got [{self.zMin}, {self.zMax}]")
        if int(self.nPoints) != self.nPoints or self.nPoints < MIN_POINTS:
            raise ValueError(f"nPoints must be an integer >= {MIN_POINTS}, got {self.nPoints}")
        object.__setattr__(self, "nPoints", int(self.nPoints))

    @classmethod
    def spanning(cls, zMin: float, zMax: float, dz: float) -> "Grid1D":
        """Grid with spacing ``dz`` whose nodes include z = 0.

        zMin is moved down and zMax up to the nearest multiples of dz.
        """
        lo = math.floor(zMin / dz)
        hi = math.ceil(zMax / dz)
        return cls(lo * dz, hi * dz, hi - lo + 1)

    @property
    def dz(self) -> float:
        return (self.zMax - self.zMin) / (self.nPoints - 1)

    @property
    def z(self) -> np.ndarray:
        return np.linspace(self.zMin, self.zMax, self.nPoints)


@dataclass
class PropagationReport:
    pT: float
    pR: float
    pInside: float
    normDrift: float
    finalTime: float
    norm: float = 1.0
    maxBoundaryDensity: float = 0.0
    dt: float = 0.0
    steps: int = 0
    snapshots: dict = field(default_factory=dict)


def significant_k_max(packet: GaussianPacket) -> float:
    """Upper end of the packet's significant wave numbers, k0 + 6 dk."""
    return packet.k0 + K_SIGMAS * packet.dk


def discretize(potential: Potential, grid: Grid1D) -> np.ndarray:
    """Potential on the grid nodes.

    Each node carries the average of the segment heights over its cell
    [z - dz/2, z + dz/2]; each delta adds gamma/dz at its nearest node.
    """
    pw = potential.to_piecewise()
    z, dz = grid.z, grid.dz
    v = np.zeros_like(z)
    lo, hi = z - 0.5 * dz, z + 0.5 * dz
    for s, e, h in pw.segments:
        overlap = np.clip(np.minimum(hi, e) - np.maximum(lo, s), 0.0, None)
        v += h * overlap / dz
    for p, g in pw.deltas:
        i = int(round((p - grid.zMin) / dz))
        if not 0 <= i < grid.nPoints:
            raise PropagationError(f"delta at z={p} lies outside the grid")
        v[i] += g / dz
    return v


def _check_setup(packet, potential, params, grid, dt):
    kmax = significant_k_max(packet)
    if grid.dz * kmax >= RESOLUTION:
        raise PropagationError(
            f"grid too coarse: dz*k_max = {grid.dz * kmax:.3g} >= {RESOLUTION} (k_max = {kmax:.4g})"
        )
    s = packet.sigma * math.sqrt(2.0)
    outside = 0.5 * erfc((packet.z0 - grid.zMin) / s) + 0.5 * erfc((grid.zMax - packet.z0) / s)
    if outside >= CONTAINMENT:
        raise PropagationError(f"initial packet mass outside the grid is {outside:.2e} >= {CONTAINMENT:g}")
    zl, zr = potential.clock_window
    if not (grid.zMin < zl and zr < grid.zMax):
        raise PropagationError("clock window must lie inside the grid")
    emax = float(dispersion_energy(params, kmax))
    if dt * emax / params.hbar >= DT_LIMIT:
        raise PropagationError(f"time step too large: dt*E_max/hbar = {dt * emax / params.hbar:.3g} >= {DT_LIMIT}")


def _masses(psi, grid, window):
    z, dz = grid.z, grid.dz
    dens = psi.real**2 + psi.imag**2
    zl, zr = window
    right = float(dens[z > zr].sum() * dz)
    left = float(dens[z < zl].sum() * dz)
    total = float(dens.sum() * dz)
    return right, left, total - right - left, total


def evolve(packet: GaussianPacket, potential: Potential, params: PhysicalParams = ATOMIC,
           grid: Grid1D | None = None, dt: float | None = None, tMax: float = 0.0,
           snapshot_times=(), check_asymptotic: bool = True) -> PropagationReport:
    """Propagate the packet to ``tMax`` and split the final mass by region.

    Parameters
    ----------
    grid : Grid1D
        Must resolve the packet (dz * k_max < 0.1) and contain it.
    dt : float, optional
        Defaults to 0.5 mu dz^2 / hbar.  The step is shrunk slightly so that
        an integer number of steps lands on ``tMax``.
    snapshot_times : iterable of float
        Times at which |psi|^2 is recorded (rounded to the nearest step).
    check_asymptotic : bool
        Raise :class:`AsymptoticConditionError` when pInside > 1e-3.

    Raises
    ------
    PropagationError
        Bad grid or step, or density above 1e-10 at a wall.
    """
    if grid is None:
        raise ValueError("a grid is required")
    if not tMax > 0:
        raise ValueError(f"tMax must be positive, got {tMax}")
    if dt is None:
        dt = 0.5 * params.mu * grid.dz**2 / params.hbar
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    nsteps = max(1, math.ceil(tMax / dt - 1e-9))
    dt = tMax / nsteps
    _check_setup(packet, potential, params, grid, dt)

    psi = packet.wavefunction(grid.z).astype(complex)
    v = discretize(potential, grid)
    norm0 = float(np.sum(np.abs(psi) ** 2) * grid.dz)

    marks = sorted({min(nsteps, max(0, round(t / dt))) for t in snapshot_times})
    snapshots = {}
    done = 0
    drift = 0.0
    edge = max(abs(psi[0]) ** 2, abs(psi[-1]) ** 2)
    for stop in marks + [nsteps]:
        if stop > done:
            entry = float(np.sum(np.abs(psi) ** 2) * grid.dz)
            dev, e = kernels.cn_propagate(psi, v, grid.dz, dt, params.hbar, params.mu, stop - done)
            drift = max(drift, abs(entry / norm0 - 1.0) + dev)
            edge = max(edge, e)
            done = stop
        if stop in marks:
            snapshots[stop * dt] = snapshot_density(psi, grid)[:, 1]

    pT, pR, pIn, norm = _masses(psi, grid, potential.clock_window)
    drift = max(drift, abs(norm / norm0 - 1.0))
    report = PropagationReport(
        pT=pT, pR=pR, pInside=pIn, normDrift=drift, finalTime=nsteps * dt, norm=norm,
        maxBoundaryDensity=float(edge), dt=dt, steps=nsteps, snapshots=snapshots,
    )
    if edge > BOUNDARY_MAX:
        raise PropagationError(f"density {edge:.2e} reached the grid boundary (limit {BOUNDARY_MAX:g}); enlarge the grid")
    if check_asymptotic and pIn > P_INSIDE_MAX:
        raise AsymptoticConditionError(
            f"asymptotic condition unmet: pInside = {pIn:.3e} > {P_INSIDE_MAX:g} at t = {report.finalTime:g}; "
            "enlarge tMax or grid",
            report,
        )
    return report


def snapshot_density(state, grid: Grid1D) -> np.ndarray:
    """Columns (z, |psi|^2) for the state on ``grid``."""
    psi = np.asarray(state)
    if psi.shape != (grid.nPoints,):
        raise ValueError(f"state has shape {psi.shape}, grid has {grid.nPoints} points")
    return np.column_stack([grid.z, np.abs(psi) ** 2])


def write_snapshot_csv(path, table) -> None:
    """Write a (z, density) table as CSV."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["z", "density"])
            for z, rho in np.asarray(table):
                w.writerow([f"{z:.12g}", f"{rho:.12g}"])
    except OSError as exc:
        raise OSError(f"cannot write snapshot to {path}: {exc}") from exc
