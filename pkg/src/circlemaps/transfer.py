"""Transfer operator for degree-2 maps, invariance residuals, orbit averages.

The operator pushes densities forward: (P h)(x) is the sum of h/f' over the
two preimages of x.  Preimages are computed by exact inverse branches at
every grid node (no binning), so residuals of exact identities measure only
root-finding error, not discretization bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densities import DensityProfile
from .maps import ExpandingCircleMap


@dataclass(frozen=True)
class GridFunction:
    """Values on the uniform grid j/n, j = 0..n, with linear interpolation."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.n + 1,):
            raise ValueError(f"expected {self.n + 1} values, got {v.shape}")
        if not np.isfinite(v).all():
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, fn, n: int) -> "GridFunction":
        xs = np.linspace(0.0, 1.0, n + 1)
        return cls(n, np.asarray(fn(xs), dtype=float))

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n + 1)

    @property
    def mass(self) -> float:
        """Trapezoidal mass (exact integral of the linear interpolant)."""
        return float(np.trapezoid(self.values, dx=1.0 / self.n))

    def __call__(self, x):
        return np.interp(np.asarray(x, dtype=float), self.xs, self.values)

    def renormalized(self) -> "GridFunction":
        m = self.mass
        if m <= 0.0:
            raise ValueError("cannot renormalize a function without positive mass")
        return GridFunction(self.n, self.values / m)

    def sup_distance(self, other: "GridFunction") -> float:
        if other.n != self.n:
            raise ValueError("grid sizes differ")
        return float(np.abs(self.values - other.values).max())


def transfer_apply(f: ExpandingCircleMap, h: GridFunction) -> GridFunction:
    """One application of the transfer operator on the grid of h.

    Inverse branches and derivative weights at the grid nodes are cached on
    the map, so repeated applications only cost two interpolations.
    """
    _, y1, y2, w1, w2 = f.preimage_table(h.n)
    return GridFunction(h.n, h(y1) * w1 + h(y2) * w2)


def invariance_residual(f: ExpandingCircleMap, rho: DensityProfile, n: int = 2**12) -> float:
    """Sup over grid nodes of |P rho - rho| with rho evaluated exactly.

    The density is evaluated at the exact preimages (not interpolated from
    grid samples): densities with a steep modulus near 0 would otherwise
    charge the residual with interpolation error that has nothing to do
    with the invariance identity being tested.
    """
    xs, y1, y2, w1, w2 = f.preimage_table(n)
    push = np.asarray(rho.density(y1), dtype=float) * w1 + np.asarray(rho.density(y2), dtype=float) * w2
    return float(np.abs(push - np.asarray(rho.density(xs), dtype=float)).max())


def fixed_point_iterate(f: ExpandingCircleMap, h0: GridFunction, n_iter: int):
    """Iterate the transfer operator, renormalizing mass each step.

    Returns (final GridFunction, residual history of successive sup
    distances).  Convergence is observed, never asserted: no general
    convergence theorem covers the low-regularity maps built here.
    """
    if (h0.values < 0.0).any():
        raise ValueError("initial density must be nonnegative")
    h = h0.renormalized()
    history = []
    for _ in range(n_iter):
        nxt = transfer_apply(f, h).renormalized()
        history.append(h.sup_distance(nxt))
        h = nxt
    return h, np.asarray(history)


def birkhoff_average(f: ExpandingCircleMap, observable, x0, n: int):
    """Time average of the observable along the orbit of x0 (length n).

    Vectorized over seed points; the average excludes no burn-in, matching
    the plain ergodic-average definition.
    """
    if n < 1000:
        raise ValueError("need at least 1e3 iterates for a meaningful average")
    x = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    total = np.zeros_like(x)
    for _ in range(n):
        total += np.asarray(observable(x), dtype=float)
        x = np.clip(f(x), 0.0, 1.0)
    avg = total / n
    return float(avg[0]) if np.ndim(x0) == 0 else avg
