import math

import numpy as np
import pytest

from swpclock.quadrature import QuadratureError, gk15_nodes, integrate


def test_nodes_and_weights():
    x, wk, wg = gk15_nodes()
    assert x.size == 15 and np.all(np.diff(x) > 0)
    assert math.isclose(wk.sum(), 2.0, rel_tol=1e-15)
    assert math.isclose(wg.sum(), 2.0, rel_tol=1e-15)
    # Gauss weights live on every other Kronrod node
    assert np.count_nonzero(wg) == 7


def test_exact_polynomial_degrees():
    x, wk, wg = gk15_nodes()
    for n in range(23):
        exact = 0.0 if n % 2 else 2.0 / (n + 1)
        assert abs(np.dot(wk, x**n) - exact) < 1e-14
    for n in range(14):
        exact = 0.0 if n % 2 else 2.0 / (n + 1)
        assert abs(np.dot(wg, x**n) - exact) < 1e-14


def test_vector_integrand():
    res = integrate(lambda x: np.array([np.sin(x), np.exp(x)]), [0.0, math.pi], rel_tol=1e-12)
    assert abs(res.value[0] - 2.0) < 1e-12
    assert abs(res.value[1] - (math.exp(math.pi) - 1)) < 1e-10
    assert np.all(res.error <= 1e-12 * np.abs(res.value))


def test_sharp_peak_with_breakpoint():
    w = 1e-4

    def f(x):
        return (w / math.pi / ((x - 0.3) ** 2 + w * w))[None, :]

    exact = (math.atan(0.7 / w) + math.atan(0.3 / w)) / math.pi
    res = integrate(f, [0.0, 0.3 - 5 * w, 0.3, 0.3 + 5 * w, 1.0], rel_tol=1e-10)
    assert abs(res.value[0] - exact) < 1e-10


def test_refinement_is_monotone_in_tolerance():
    def f(x):
        return (1.0 / (1e-3 + (x - 0.5) ** 2))[None, :]

    exact = 2 * math.atan(0.5 / math.sqrt(1e-3)) / math.sqrt(1e-3)
    errs = [abs(integrate(f, [0, 1], rel_tol=t).value[0] - exact) for t in (1e-4, 1e-7, 1e-10)]
    assert errs[0] >= errs[1] >= errs[2]
    assert errs[2] < 1e-9 * exact


def test_depth_limit_raises():
    with pytest.raises(QuadratureError, match="depth"):
        integrate(lambda x: (1 / np.sqrt(np.abs(x - 0.3)))[None, :], [0, 1], rel_tol=1e-14, max_depth=3)


@pytest.mark.filterwarnings("ignore:divide by zero")
def test_non_finite_integrand_raises():
    # the centre node of [0, 1] lands on the singularity
    with pytest.raises(QuadratureError, match="non-finite"):
        integrate(lambda x: (1 / np.abs(x - 0.5))[None, :], [0, 1])


def test_needs_two_breakpoints():
    with pytest.raises(ValueError):
        integrate(lambda x: x[None, :], [1.0, 1.0])
