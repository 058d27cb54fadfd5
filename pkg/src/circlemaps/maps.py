"""Two-branch full-branch expanding interval maps with circle semantics.

A map is stored as two increasing branches on [0, a] and [a, 1], each a
bijection onto [0, 1], together with derivative and inverse-branch
evaluators.  Circle structure (0 identified with 1) only enters the
smoothness check at the gluing points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .solvers import invert_monotone


def circle_distance(u, v):
    """Distance on the circle of unit circumference."""
    d = np.abs(np.asarray(u, dtype=float) - np.asarray(v, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


@dataclass(frozen=True)
class DomainPartition:
    """The 2^level maximal intervals on which the level-th iterate is injective."""

    level: int
    endpoints: np.ndarray

    @property
    def count(self) -> int:
        return self.endpoints.size - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.endpoints)

    def intervals(self) -> np.ndarray:
        return np.column_stack([self.endpoints[:-1], self.endpoints[1:]])


@dataclass(frozen=True)
class C1CircleReport:
    interior_residual: float
    endpoint_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.interior_residual, self.endpoint_residual) <= self.tol


class ExpandingCircleMap:
    """Degree-2 orientation-preserving expanding map on [0, 1].

    Branch evaluators are vectorized callables; inverse branches may be
    supplied (exact constructions) or are synthesized by monotone inversion.
    Maps are immutable after construction and safe for concurrent reads.
    """

    def __init__(
        self,
        a: float,
        branch1: Callable,
        branch2: Callable,
        deriv1: Callable,
        deriv2: Callable,
        inv1: Optional[Callable] = None,
        inv2: Optional[Callable] = None,
        step1: Optional[Callable] = None,
        step2: Optional[Callable] = None,
        provenance: Optional[dict] = None,
        validate: bool = True,
        n_validation: int = 4096,
    ):
        if not 0.0 < a < 1.0:
            raise ValueError(f"breakpoint must lie in (0, 1), got {a}")
        self.a = float(a)
        self.branch1 = branch1
        self.branch2 = branch2
        self.deriv1 = deriv1
        self.deriv2 = deriv2
        self.inv1 = inv1 if inv1 is not None else self._generic_inverse(1)
        self.inv2 = inv2 if inv2 is not None else self._generic_inverse(2)
        # fused (value, derivative) evaluators; constructions whose branch
        # values need a monotone solve provide these to halve the work
        self._step1 = step1
        self._step2 = step2
        self.provenance = dict(provenance or {})
        self._tables: dict = {}
        self.certificate: dict = {}
        self.lam = self.sig = None
        self._estimate_expansion(n_validation)
        if validate:
            self._validate(n_validation)

    # -- construction-time checks -------------------------------------

    def _generic_inverse(self, i):
        branch = self.branch1 if i == 1 else self.branch2
        deriv = self.deriv1 if i == 1 else self.deriv2
        lo, hi = (0.0, self.a) if i == 1 else (self.a, 1.0)

        def inv(y):
            return invert_monotone(branch, y, lo, hi, deriv=deriv)

        return inv

    def _sample_points(self, n):
        pts = [np.linspace(0.0, 1.0, n + 1)]
        extra = self.provenance.get("breakpoints")
        if extra is not None:
            pts.append(np.asarray(extra, dtype=float))
        # expansion extrema often sit right next to the branch ends
        pts.append(np.concatenate([np.logspace(-12, 0, 64) * self.a,
                                   self.a + np.logspace(-12, 0, 64) * (1 - self.a)]))
        return np.unique(np.clip(np.concatenate(pts), 0.0, 1.0))

    def _estimate_expansion(self, n):
        xs = self._sample_points(n)
        on1 = xs[xs <= self.a]
        on2 = xs[xs >= self.a]
        d = np.concatenate([np.asarray(self.deriv1(on1), dtype=float),
                            np.asarray(self.deriv2(on2), dtype=float)])
        widen = float(np.abs(np.diff(d)).max()) if d.size > 1 else 0.0
        self.lam_raw = float(d.min())
        self.sig_raw = float(d.max())
        # sampled extrema are biased inward; widen by the observed
        # derivative variation at grid spacing
        self.lam = self.lam_raw - widen
        self.sig = self.sig_raw + widen

    def _validate(self, n):
        fb = {
            "branch1_at_0": abs(float(np.asarray(self.branch1(0.0)))),
            "branch1_at_a": abs(float(np.asarray(self.branch1(self.a))) - 1.0),
            "branch2_at_a": abs(float(np.asarray(self.branch2(self.a)))),
            "branch2_at_1": abs(float(np.asarray(self.branch2(1.0))) - 1.0),
        }
        worst_fb = max(fb.values())
        if worst_fb > 1e-9:
            raise ValueError(f"branches are not full: residuals {fb}")
        if self.lam_raw <= 1.0:
            raise ValueError(f"map is not uniformly expanding: min derivative {self.lam_raw}")

        ys = np.linspace(0.0, 1.0, 513)
        r1 = np.abs(np.asarray(self.branch1(self.inv1(ys)), dtype=float) - ys).max()
        r2 = np.abs(np.asarray(self.branch2(self.inv2(ys)), dtype=float) - ys).max()
        if max(r1, r2) > 1e-10:
            raise ValueError(f"inverse branches inconsistent: residuals {r1:.2e}, {r2:.2e}")

        self.certificate = {
            "full_branch_residuals": fb,
            "expansion": {"lam": self.lam, "sig": self.sig,
                          "lam_raw": self.lam_raw, "sig_raw": self.sig_raw},
            "inverse_residuals": {"branch1": float(r1), "branch2": float(r2)},
        }

    # -- evaluation ----------------------------------------------------

    def __call__(self, x):
        """Map value; at the breakpoint the second branch wins (0 on the circle)."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        if (arr < -1e-12).any() or (arr > 1.0 + 1e-12).any():
            raise ValueError("map argument outside [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        out = np.empty_like(arr)
        lo = arr < self.a
        if lo.any():
            out[lo] = np.asarray(self.branch1(arr[lo]), dtype=float)
        if (~lo).any():
            out[~lo] = np.asarray(self.branch2(arr[~lo]), dtype=float)
        return float(out[0]) if scalar else out

    def eval_branch(self, i: int, x):
        return (self.branch1 if i == 1 else self.branch2)(np.asarray(x, dtype=float))

    def deriv(self, x):
        """Derivative; one-sided from the owning branch, second branch at a."""
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(np.clip(arr, 0.0, 1.0))
        out = np.empty_like(arr)
        lo = arr < self.a
        if lo.any():
            out[lo] = np.asarray(self.deriv1(arr[lo]), dtype=float)
        if (~lo).any():
            out[~lo] = np.asarray(self.deriv2(arr[~lo]), dtype=float)
        return float(out[0]) if scalar else out

    def deriv_branch(self, i: int, x):
        return (self.deriv1 if i == 1 else self.deriv2)(np.asarray(x, dtype=float))

    def branch_step(self, i: int, x):
        """(value, derivative) of branch i in one pass."""
        x = np.asarray(x, dtype=float)
        fused = self._step1 if i == 1 else self._step2
        if fused is not None:
            return fused(x)
        return self.eval_branch(i, x), self.deriv_branch(i, x)

    def inverse_branch(self, i: int, y):
        """The unique preimage of y in branch i's domain."""
        arr = np.asarray(y, dtype=float)
        if (arr < -1e-12).any() or (arr > 1.0 + 1e-12).any():
            raise ValueError("preimage argument outside [0, 1]")
        arr = np.clip(arr, 0.0, 1.0)
        return (self.inv1 if i == 1 else self.inv2)(arr)

    def iterate(self, x, n: int):
        """Orbit (x, f x, ..., f^n x); vectorized over seed points."""
        arr = np.atleast_1d(np.asarray(x, dtype=float))
        orbit = np.empty((n + 1,) + arr.shape)
        orbit[0] = arr
        for k in range(n):
            orbit[k + 1] = np.clip(self(orbit[k]), 0.0, 1.0)
        if np.ndim(x) == 0:
            return orbit[:, 0]
        return orbit

    # -- structure -----------------------------------------------------

    def injectivity_domains(self, n: int, cap: int = 24) -> DomainPartition:
        """Endpoints of the 2^n injectivity domains by inverse pullback of {0, a, 1}."""
        if n < 1:
            raise ValueError("level must be >= 1")
        if n > cap:
            raise ValueError(f"level {n} exceeds cap {cap}")
        ends = np.array([0.0, self.a, 1.0])
        for _ in range(n - 1):
            left = np.asarray(self.inv1(ends), dtype=float)
            right = np.asarray(self.inv2(ends), dtype=float)
            ends = np.unique(np.concatenate([left, right]))
            # the two pullbacks meet at the breakpoint only up to solver
            # roundoff; true domain widths are >= sig^-cap >> 1e-11, so
            # collapsing closer endpoints removes exactly those duplicates
            keep = np.concatenate([[True], np.diff(ends) > 1e-11])
            ends = ends[keep]
        expected = 2**n + 1
        if ends.size != expected:
            raise RuntimeError(f"expected {expected} endpoints, got {ends.size}")
        return DomainPartition(n, ends)

    def preimage_table(self, n: int):
        """Cached inverse branches and transfer weights on the uniform n-grid."""
        tab = self._tables.get(n)
        if tab is None:
            xs = np.linspace(0.0, 1.0, n + 1)
            y1 = np.asarray(self.inv1(xs), dtype=float)
            y2 = np.asarray(self.inv2(xs), dtype=float)
            w1 = 1.0 / np.asarray(self.deriv1(y1), dtype=float)
            w2 = 1.0 / np.asarray(self.deriv2(y2), dtype=float)
            tab = (xs, y1, y2, w1, w2)
            self._tables[n] = tab
        return tab


def check_c1_circle(f: ExpandingCircleMap, tol: float = 1e-8) -> C1CircleReport:
    """Derivative gluing residuals at the breakpoint and across 0 == 1."""
    interior = abs(
        float(np.asarray(f.deriv_branch(1, f.a))) - float(np.asarray(f.deriv_branch(2, f.a)))
    )
    endpoint = abs(
        float(np.asarray(f.deriv_branch(1, 0.0))) - float(np.asarray(f.deriv_branch(2, 1.0)))
    )
    return C1CircleReport(interior, endpoint, tol)


def c1_modulus_distance(f, g, est_f, est_g, n: int = 4096) -> float:
    """C1 distance plus the uniform distance of the derivative moduli.

    Map values are compared in the circle metric; the modulus estimates
    must share their scale grid.
    """
    if not np.allclose(est_f.scales, est_g.scales):
        raise ValueError("modulus estimates must share scales")
    xs = np.linspace(0.0, 1.0, n + 1)
    d_map = float(circle_distance(f(xs), g(xs)).max())
    d_deriv = float(np.abs(f.deriv(xs) - g.deriv(xs)).max())
    d_mod = float(np.abs(est_f.values - est_g.values).max())
    return d_map + d_deriv + d_mod


def doubling_map() -> ExpandingCircleMap:
    """The angle-doubling map as an exact two-branch representation."""
    two = lambda x: np.full_like(np.asarray(x, dtype=float), 2.0)
    return ExpandingCircleMap(
        0.5,
        branch1=lambda x: 2.0 * np.asarray(x, dtype=float),
        branch2=lambda x: 2.0 * np.asarray(x, dtype=float) - 1.0,
        deriv1=two,
        deriv2=two,
        inv1=lambda y: 0.5 * np.asarray(y, dtype=float),
        inv2=lambda y: 0.5 * np.asarray(y, dtype=float) + 0.5,
        provenance={"kind": "doubling"},
    )


def linear_two_branch(a: float) -> ExpandingCircleMap:
    """Full-branch map with constant slopes 1/a and 1/(1-a)."""
    if not 0.0 < a < 1.0:
        raise ValueError("breakpoint must lie in (0, 1)")
    return ExpandingCircleMap(
        a,
        branch1=lambda x: np.asarray(x, dtype=float) / a,
        branch2=lambda x: (np.asarray(x, dtype=float) - a) / (1.0 - a),
        deriv1=lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / a),
        deriv2=lambda x: np.full_like(np.asarray(x, dtype=float), 1.0 / (1.0 - a)),
        inv1=lambda y: a * np.asarray(y, dtype=float),
        inv2=lambda y: a + (1.0 - a) * np.asarray(y, dtype=float),
        provenance={"kind": "linear", "a": a},
    )
