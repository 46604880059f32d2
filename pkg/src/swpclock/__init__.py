"""Salecker-Wigner-Peres clock times and post-selected average tunneling
times for Gaussian packets on rectangular and double-delta barriers."""

__version__ = "0.1.0"

from .kernels import BACKEND
from .model import (
    ATOMIC,
    DoubleDelta,
    GaussianPacket,
    PacketWarning,
    PhysicalParams,
    Piecewise,
    Potential,
    Rectangular,
    fourier_amplitude,
    initial_right_probability,
)
from .scatter import ScatteringError, ScatteringResult, amplitudes, closed_form_dd_probT
from .clock import (
    ClockAccuracyWarning,
    ClockTimes,
    clock_time_reflection,
    clock_time_transmission,
    clock_times,
    dwell_double_delta,
    dwell_rectangular,
    stationary_dwell,
)
from .resonance import Resonance, find_resonances, resonant_dwell
from .average import AverageTimes, QuadratureError, QuadratureOptions, averaged_times, mean_dwell, spectral_densities
from .propagate import Grid1D, PropagationReport, evolve

__all__ = [
    "__version__", "BACKEND", "ATOMIC", "PhysicalParams", "Potential", "Piecewise", "Rectangular",
    "DoubleDelta", "GaussianPacket", "PacketWarning", "fourier_amplitude", "initial_right_probability",
    "ScatteringError", "ScatteringResult", "amplitudes", "closed_form_dd_probT", "ClockAccuracyWarning",
    "ClockTimes", "clock_times", "clock_time_transmission", "clock_time_reflection", "dwell_rectangular",
    "dwell_double_delta", "stationary_dwell", "Resonance", "find_resonances", "resonant_dwell",
    "AverageTimes", "QuadratureError", "QuadratureOptions", "averaged_times", "mean_dwell",
    "spectral_densities", "Grid1D", "PropagationReport", "evolve",
]
