"""Low-level numerical kernels: monotone inversion and fixed-step ODE integration.

Everything here is deliberately dependency-free (numpy only) so the rest of
the package can lean on a single, well-tested inversion routine.
"""

from __future__ import annotations

import numpy as np


class ConvergenceError(RuntimeError):
    """Raised when an iterative solve fails; carries the last bracket."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


def invert_monotone(
    fn,
    target,
    lo,
    hi,
    deriv=None,
    atol=1e-15,
    rtol=1e-13,
    max_newton=50,
    max_bisect=200,
):
    """Solve fn(x) = target for increasing fn on [lo, hi], elementwise.

    Runs safeguarded Newton (when ``deriv`` is given) inside a shrinking
    bisection bracket; after ``max_newton`` Newton steps it falls back to
    pure bisection.  Targets at or beyond the range of fn are clamped to the
    matching endpoint so that exact fixed endpoints (0, a, 1) come out exact.
    Converged entries are compacted out of the working set, so large batches
    only pay for their stragglers.

    Convergence means |fn(x) - target| <= atol + rtol*|target|.
    """
    target = np.asarray(target, dtype=float)
    scalar = target.ndim == 0
    t_all = np.atleast_1d(target).astype(float)
    n = t_all.shape[0]
    out = np.empty(n)

    f_lo = float(np.asarray(fn(np.array([float(lo)])))[0])
    f_hi = float(np.asarray(fn(np.array([float(hi)])))[0])
    low_side = f_lo - t_all >= 0.0
    high_side = f_hi - t_all <= 0.0
    out[low_side] = lo
    out[high_side] = hi

    idx = np.nonzero(~(low_side | high_side))[0]
    t = t_all[idx]
    a = np.full(idx.shape, float(lo))
    b = np.full(idx.shape, float(hi))
    x = 0.5 * (a + b)
    tol = atol + rtol * np.abs(t)

    for it in range(max_newton + max_bisect):
        if idx.size == 0:
            break
        fx = np.asarray(fn(x), dtype=float) - t
        done = (np.abs(fx) <= tol) | (b - a <= 1e-17 * np.maximum(1.0, np.abs(b)))
        if done.any():
            out[idx[done]] = x[done]
            keep = ~done
            idx, t, a, b, x, fx, tol = (
                idx[keep], t[keep], a[keep], b[keep], x[keep], fx[keep], tol[keep]
            )
            if idx.size == 0:
                break
        neg = fx < 0.0
        a = np.where(neg, x, a)
        b = np.where(neg, b, x)
        if deriv is not None and it < max_newton:
            d = np.asarray(deriv(x), dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                x_new = x - fx / d
            bad = ~np.isfinite(x_new) | (x_new <= a) | (x_new >= b)
            x_new[bad] = 0.5 * (a[bad] + b[bad])
            x = x_new
        else:
            x = 0.5 * (a + b)

    if idx.size:
        raise ConvergenceError(
            f"monotone inversion failed for {int(idx.size)} of {n} targets",
            bracket=(a.copy(), b.copy()),
        )

    return float(out[0]) if scalar else out


def bisect_root(fn, lo, hi, tol=1e-12, max_iter=200):
    """Plain bisection for a scalar root of fn on [lo, hi].

    Endpoints are tested first; a root exactly at an endpoint is returned
    without iteration (this happens for degenerate compensator levels).
    """
    flo = fn(lo)
    fhi = fn(hi)
    if abs(flo) <= tol:
        return float(lo)
    if abs(fhi) <= tol:
        return float(hi)
    if flo * fhi > 0.0:
        raise ConvergenceError(
            f"no sign change on [{lo}, {hi}] (f={flo:.3e}, {fhi:.3e})",
            bracket=(lo, hi),
        )
    a, b = float(lo), float(hi)
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        fm = fn(m)
        if abs(fm) <= tol or (b - a) <= 1e-16 * max(1.0, abs(m)):
            return m
        if (fm < 0.0) == (flo < 0.0):
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def rk4_path(rhs, x0, y0, x1, n_steps):
    """Integrate dy/dx = rhs(x, y) from x0 to x1 with n_steps classical RK4 steps.

    Returns (xs, ys) arrays of length n_steps + 1 including both endpoints.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    h = (x1 - x0) / n_steps
    if not np.isfinite(h) or h == 0.0:
        raise ValueError("degenerate step size")
    xs = x0 + h * np.arange(n_steps + 1)
    xs[-1] = x1
    ys = np.empty(n_steps + 1)
    y = float(y0)
    ys[0] = y
    for i in range(n_steps):
        x = xs[i]
        k1 = rhs(x, y)
        k2 = rhs(x + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(x + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(x + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[i + 1] = y
    return xs, ys
