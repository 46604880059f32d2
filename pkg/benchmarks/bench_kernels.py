"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--points 200001]

Prints best-of-N wall times and the largest disagreement between the two
backends for each kernel.
"""

import argparse
import time

import numpy as np

from swpclock import _kernels_py
from swpclock.model import ATOMIC, DoubleDelta, GaussianPacket, Rectangular
from swpclock.propagate import Grid1D, discretize
from swpclock.scatter import _elements

try:
    from swpclock import _kernels
except ImportError:  # not built
    _kernels = None


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def bench_transfer(backends, n, repeat):
    print(f"transfer_amplitudes, {n} wave numbers")
    for pot in (Rectangular(0.5, 10.0), DoubleDelta(16.0, 5.0)):
        el, u = _elements(pot, ATOMIC)
        k = np.linspace(0.05, 3.0, n)
        du = np.full(n, 1e-5)
        args = (k, du, el.kind, el.width, u, el.in_window, el.x_left, el.x_right)
        results = {}
        for name, mod in backends.items():
            t, out = best_of(lambda: mod.transfer_amplitudes(*args), repeat)
            results[name] = (t, out)
            print(f"  {type(pot).__name__:12s} {name:7s} {t * 1e3:9.2f} ms  {t / n * 1e9:7.1f} ns/k")
        if len(results) == 2:
            (_, a), (_, b) = results.values()
            diff = max(float(np.max(np.abs(x - y) / np.maximum(np.abs(x), 1e-300))) for x, y in zip(a, b))
            speed = results["python"][0] / results["cython"][0]
            print(f"  {'':12s} speedup {speed:6.1f}x, max relative difference {diff:.1e}")


def bench_cn(backends, npoints, steps, repeat):
    print(f"cn_propagate, {npoints} points x {steps} steps")
    packet = GaussianPacket(1.2, 6.0, -48.0)
    half = 0.5 * (npoints - 1) * 0.05
    grid = Grid1D.spanning(-half, half, 0.05)
    v = discretize(DoubleDelta(16.0, 5.0), grid)
    psi0 = packet.wavefunction(grid.z).astype(complex)
    results = {}
    for name, mod in backends.items():
        def go():
            psi = psi0.copy()
            mod.cn_propagate(psi, v, grid.dz, 0.2, 1.0, 1.0, steps)
            return psi
        t, psi = best_of(go, repeat)
        results[name] = (t, psi)
        print(f"  {name:7s} {t * 1e3:9.2f} ms  {t / (grid.nPoints * steps) * 1e9:7.2f} ns/point-step")
    if len(results) == 2:
        (_, a), (_, b) = results.values()
        speed = results["python"][0] / results["cython"][0]
        print(f"  speedup {speed:6.1f}x, max |difference| {float(np.max(np.abs(a - b))):.1e}")


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--wavenumbers", type=int, default=200_000)
    p.add_argument("--points", type=int, default=200_001)
    p.add_argument("--steps", type=int, default=50)
    args = p.parse_args(argv)

    backends = {"python": _kernels_py}
    if _kernels is not None:
        backends = {"cython": _kernels, "python": _kernels_py}
    else:
        print("compiled extension not available; timing the fallback only")
    bench_transfer(backends, args.wavenumbers, args.repeat)
    bench_cn(backends, args.points, args.steps, args.repeat)


if __name__ == "__main__":
    main()
