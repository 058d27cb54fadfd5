import numpy as np
import pytest

from circlemaps.solvers import ConvergenceError, bisect_root, invert_monotone, rk4_path


def test_invert_scalar_square():
    f = lambda x: np.asarray(x) ** 2
    d = lambda x: 2.0 * np.asarray(x)
    x = invert_monotone(f, 0.49, 0.0, 1.0, deriv=d)
    assert abs(x - 0.7) < 1e-12


def test_invert_vector_targets():
    f = lambda x: np.asarray(x) ** 3
    ys = np.linspace(0.0, 1.0, 101)
    xs = invert_monotone(f, ys, 0.0, 1.0, deriv=lambda x: 3.0 * np.asarray(x) ** 2)
    assert np.abs(xs**3 - ys).max() <= 2e-13


def test_invert_without_derivative_bisects():
    f = lambda x: np.asarray(x) + 0.1 * np.sin(np.asarray(x))
    x = invert_monotone(f, 0.5, 0.0, 2.0)
    assert abs(float(f(np.asarray(x))) - 0.5) <= 1e-13


def test_invert_clamps_out_of_range_targets_exactly():
    f = lambda x: np.asarray(x)
    assert invert_monotone(f, -0.5, 0.0, 1.0) == 0.0
    assert invert_monotone(f, 1.5, 0.0, 1.0) == 1.0
    assert invert_monotone(f, 0.0, 0.0, 1.0) == 0.0
    assert invert_monotone(f, 1.0, 0.0, 1.0) == 1.0


def test_invert_handles_tiny_targets():
    # deep pullbacks hit targets around 1e-15; the residual contract must
    # hold there and the root must land in the right ballpark
    f = lambda x: 2.0 * np.asarray(x)
    x = invert_monotone(f, 3e-15, 0.0, 1.0, deriv=lambda x: np.full_like(np.asarray(x), 2.0))
    assert abs(2.0 * x - 3e-15) <= 1e-15 + 1e-13 * 3e-15
    assert 1e-15 <= x <= 2e-15


def test_bisect_root_endpoint_root_returned_exactly():
    assert bisect_root(lambda d: -d, 0.0, 0.3) == 0.0


def test_bisect_root_interior():
    r = bisect_root(lambda x: x**2 - 2.0, 1.0, 2.0, tol=1e-14)
    assert abs(r - np.sqrt(2.0)) < 1e-13


def test_bisect_root_no_sign_change_raises():
    with pytest.raises(ConvergenceError):
        bisect_root(lambda x: 1.0 + x * 0, 0.0, 1.0)


def test_rk4_exact_on_cubic_rhs():
    # y' = 3x^2 integrates exactly: RK4 is degree-3 exact
    xs, ys = rk4_path(lambda x, y: 3.0 * x * x, 0.0, 0.0, 1.0, 7)
    assert np.abs(ys - xs**3).max() < 1e-14


def test_rk4_fourth_order_on_exponential():
    errs = []
    for n in (16, 32, 64):
        _, ys = rk4_path(lambda x, y: y, 0.0, 1.0, 1.0, n)
        errs.append(abs(ys[-1] - np.e))
    orders = [np.log2(errs[i] / errs[i + 1]) for i in range(2)]
    assert all(3.7 < o < 4.3 for o in orders)


def test_rk4_rejects_bad_steps():
    with pytest.raises(ValueError):
        rk4_path(lambda x, y: y, 0.0, 1.0, 1.0, 0)
