import os
import subprocess
import sys

import numpy as np
import pytest

from swpclock import _kernels_py, kernels
from swpclock.model import ATOMIC, DoubleDelta, GaussianPacket, Piecewise, Rectangular
from swpclock.propagate import Grid1D, discretize
from swpclock.scatter import _elements

try:
    from swpclock import _kernels
except ImportError:
    _kernels = None

needs_ext = pytest.mark.skipif(_kernels is None, reason="compiled extension not built")

POTENTIALS = [
    Rectangular(0.5, 10),
    Rectangular(0.5, 200),
    DoubleDelta(16, 5),
    Piecewise(segments=[(0, 1.5, 0.8), (1.5, 4, 0.2), (4, 5, 1.1)], deltas=[(2.5, 0.7)], clock_window=(1.0, 4.5)),
]


def test_backend_selected():
    expected = "cython" if _kernels is not None and os.environ.get("SWPCLOCK_PURE_PYTHON") != "1" else "python"
    assert kernels.BACKEND == expected


@needs_ext
@pytest.mark.parametrize("pot", POTENTIALS, ids=lambda p: type(p).__name__)
def test_transfer_parity(pot):
    el, u = _elements(pot, ATOMIC)
    k = np.concatenate([np.linspace(0.01, 3.0, 997), [1.0, 1.0 + 1e-9, 0.99999]])
    du = np.where(np.arange(k.size) % 2, 1e-5, -3e-6)
    args = (k, du, el.kind, el.width, u, el.in_window, el.x_left, el.x_right)
    a = _kernels.transfer_amplitudes(*args)
    b = _kernels_py.transfer_amplitudes(*args)
    for x, y in zip(a, b):
        assert np.max(np.abs(x - y) / np.maximum(np.abs(x), 1e-300)) < 1e-12


@needs_ext
def test_crank_nicolson_parity():
    packet = GaussianPacket(1.2, 6, -48)
    g = Grid1D.spanning(-120, 60, 0.05)
    v = discretize(DoubleDelta(16, 5), g)
    psi0 = packet.wavefunction(g.z).astype(complex)
    a, b = psi0.copy(), psi0.copy()
    ra = _kernels.cn_propagate(a, v, g.dz, 0.1, 1.0, 1.0, 200)
    rb = _kernels_py.cn_propagate(b, v, g.dz, 0.1, 1.0, 1.0, 200)
    assert np.max(np.abs(a - b)) < 1e-12
    assert abs(ra[0] - rb[0]) < 1e-12
    assert ra[0] < 1e-12


def test_crank_nicolson_is_unitary():
    g = Grid1D.spanning(-60, 60, 0.05)
    v = discretize(Rectangular(0.5, 10), g)
    psi = GaussianPacket(1.0, 5, -20).wavefunction(g.z).astype(complex)
    n0 = np.sum(np.abs(psi) ** 2)
    dev, edge = kernels.cn_propagate(psi, v, g.dz, 0.2, 1.0, 1.0, 100)
    assert abs(np.sum(np.abs(psi) ** 2) / n0 - 1) < 1e-12
    assert dev < 1e-12 and edge < 1e-10


def test_pure_python_switch():
    code = (
        "from swpclock import kernels, BACKEND; "
        "from swpclock.clock import clock_time_transmission; "
        "from swpclock.model import Rectangular; "
        "print(kernels.BACKEND, BACKEND, repr(clock_time_transmission(Rectangular(0.5, 10), k=0.7)))"
    )
    env = dict(os.environ, SWPCLOCK_PURE_PYTHON="1")
    res = subprocess.run([sys.executable, "-c", code], capture_output=True, text=True, env=env, check=True)
    backend, exported, value = res.stdout.split()
    assert backend == "python" and exported == "python"
    from swpclock.clock import clock_time_transmission

    ref = clock_time_transmission(Rectangular(0.5, 10), k=0.7)
    assert abs(float(value) / ref - 1) < 1e-10
