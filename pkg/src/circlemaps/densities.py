"""Densities that are 1 + omega near 0 and balance to mass 1/2 on each half.

The construction pins the density to 1 + omega(x) on a short initial
interval (that is what makes omega the sharp regularity of the density),
then pays the excess mass back through a shallow plateau below 1 on the
rest of the first half.  The plateau depth is solved so each half of [0, 1]
carries exactly mass 1/2, the endpoint values are exactly 1, and the total
oscillation stays below 1/2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .moduli import Modulus, is_in_K
from .piecewise import PiecewiseFunction, bump_piece, const_piece, smoothstep_piece
from .solvers import bisect_root

#: the pinned initial interval never extends past 1/8 so the compensator
#: always has room on the first half
MAX_PIN = 0.125


class CertificationError(RuntimeError):
    pass


@dataclass(frozen=True)
class CertificationRecord:
    rho_min: float
    rho_span: float
    half_mass_residuals: tuple
    endpoint_residuals: tuple
    cumulative_residuals: tuple
    above_half: bool
    balanced_halves: bool
    bounded_oscillation: bool
    unit_endpoints: bool
    cumulative_ok: bool
    max_grid_jump: float  # informational: largest jump between adjacent samples

    @property
    def passed(self) -> bool:
        return (
            self.above_half
            and self.balanced_halves
            and self.bounded_oscillation
            and self.unit_endpoints
            and self.cumulative_ok
        )

    def as_dict(self) -> dict:
        return {
            "rho_min": self.rho_min,
            "rho_span": self.rho_span,
            "half_mass_residuals": list(self.half_mass_residuals),
            "endpoint_residuals": list(self.endpoint_residuals),
            "cumulative_residuals": list(self.cumulative_residuals),
            "above_half": self.above_half,
            "balanced_halves": self.balanced_halves,
            "bounded_oscillation": self.bounded_oscillation,
            "unit_endpoints": self.unit_endpoints,
            "cumulative_ok": self.cumulative_ok,
            "max_grid_jump": self.max_grid_jump,
            "passed": self.passed,
        }


@dataclass
class DensityProfile:
    """Evaluable density on [0, 1] with its exact cumulative.

    ``cutoff`` is the scale below which the density equals 1 + omega, and
    ``certification`` records the most recent property check.
    """

    density: Callable
    cumulative: Callable
    cutoff: float
    source: Optional[Modulus] = None
    label: str = "custom"
    certification: Optional[CertificationRecord] = None

    def __call__(self, x):
        return self.density(x)

    def cumulative_eval(self, x):
        arr = np.asarray(x, dtype=float)
        if (arr < -1e-12).any() or (arr > 1.0 + 1e-12).any():
            raise ValueError("cumulative argument outside [0, 1]")
        return self.cumulative(np.clip(arr, 0.0, 1.0))


def build_density(omega: Modulus) -> DensityProfile:
    """Density equal to 1 + omega on [0, t], compensated to balanced halves.

    Layout of the first half: the pinned initial piece, a cubic ease down
    to level 1 - delta by x = 1/4, a flat stretch, and a cubic ease back to
    exactly 1 at x = 1/2.  The second half mirrors the template without a
    pinned piece, so its level solves to 0 and the density sits at 1 there.
    Both levels are found by bisection on the half-mass residual.
    """
    report = is_in_K(omega, n_samples=1024)
    if not report.passed:
        raise ValueError(
            "modulus fails class membership "
            f"(vanish={report.vanishes_at_zero}, monotone={report.monotone}, "
            f"concave={report.midpoint_concave})"
        )
    t_pin = min(omega.cutoff, MAX_PIN)
    top = 1.0 + float(omega(t_pin))

    def first_half(delta):
        return PiecewiseFunction(
            [
                bump_piece(t_pin, 1.0, 1.0, omega),
                smoothstep_piece(t_pin, 0.25, top, 1.0 - delta),
                const_piece(0.25, 0.5 - t_pin, 1.0 - delta),
                smoothstep_piece(0.5 - t_pin, 0.5, 1.0 - delta, 1.0),
            ]
        )

    def second_half(delta):
        return PiecewiseFunction(
            [
                smoothstep_piece(0.5, 0.5 + t_pin, 1.0, 1.0 - delta),
                const_piece(0.5 + t_pin, 0.75, 1.0 - delta),
                smoothstep_piece(0.75, 1.0, 1.0 - delta, 1.0),
            ]
        )

    delta = bisect_root(lambda d: first_half(d).total - 0.5, 0.0, 0.31, tol=1e-13)
    delta2 = bisect_root(lambda d: second_half(d).total - 0.5, -0.31, 0.31, tol=1e-13)
    if float(omega(t_pin)) + max(abs(delta), abs(delta2)) >= 0.5 - 1e-9:
        raise CertificationError(
            f"compensator level {delta:.3e} leaves no oscillation headroom"
        )

    left = first_half(delta)
    right = second_half(delta2)
    half_mass = left.total

    def density(x):
        if isinstance(x, float):
            return left(x) if x <= 0.5 else right(x)
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.empty_like(arr)
        lo = arr <= 0.5
        if lo.any():
            out[lo] = np.atleast_1d(left(arr[lo]))
        if (~lo).any():
            out[~lo] = np.atleast_1d(right(arr[~lo]))
        return float(out[0]) if scalar else out

    def cumulative(x):
        if isinstance(x, float):
            return left.primitive(x) if x <= 0.5 else half_mass + right.primitive(x)
        arr = np.asarray(x, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        out = np.empty_like(arr)
        lo = arr <= 0.5
        if lo.any():
            out[lo] = np.atleast_1d(left.primitive(arr[lo]))
        if (~lo).any():
            out[~lo] = half_mass + np.atleast_1d(right.primitive(arr[~lo]))
        return float(out[0]) if scalar else out

    profile = DensityProfile(density, cumulative, t_pin, omega, omega.descriptor)
    profile.certification = certify(profile)
    if not profile.certification.passed:
        raise CertificationError(f"constructed density failed certification: {profile.certification.as_dict()}")
    return profile


def profile_from_callable(
    fn,
    antiderivative=None,
    cutoff: float = MAX_PIN,
    source: Optional[Modulus] = None,
    label: str = "custom",
    n_nodes: int = 2**15,
) -> DensityProfile:
    """Wrap an arbitrary density evaluator as a profile.

    Without an exact antiderivative the cumulative is a dense cubic-Hermite
    interpolant of a composite-Simpson sweep; adequate for smooth test
    densities only.
    """
    if antiderivative is not None:
        cumulative = antiderivative
    else:
        xs = np.linspace(0.0, 1.0, n_nodes + 1)
        vals = np.asarray(fn(xs), dtype=float)
        h = xs[1] - xs[0]
        mids = np.asarray(fn(0.5 * (xs[:-1] + xs[1:])), dtype=float)
        increments = (h / 6.0) * (vals[:-1] + 4.0 * mids + vals[1:])
        cum = np.concatenate([[0.0], np.cumsum(increments)])
        spline = CubicHermiteSpline(xs, cum, vals)
        cumulative = lambda x: spline(np.asarray(x, dtype=float))
    return DensityProfile(fn, cumulative, cutoff, source, label)


def endpoint_graded_quad(fn, lo: float, hi: float, depth: int = 48) -> float:
    """Adaptive quadrature on [lo, hi] with subdivision graded to both ends.

    A single adaptive pass can step right over features whose width is far
    below the interval length (the pinned modulus piece lives on a scale
    like 2^-12 of the half-interval); grading the subdivision geometrically
    toward the endpoints makes every sliver's width comparable to its
    distance from the end, so endpoint-localized structure is resolved.
    """
    w = hi - lo
    cuts = np.unique(
        np.concatenate(
            [
                [lo, hi],
                lo + w * 0.5 ** np.arange(1, depth + 1),
                hi - w * 0.5 ** np.arange(1, depth + 1),
            ]
        )
    )
    total = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for a, b in zip(cuts[:-1], cuts[1:]):
            piece, _ = quad(fn, a, b, epsabs=1e-15, epsrel=1e-13, limit=100)
            total += piece
    return total


def certify(profile: DensityProfile, n_grid: int = 2**13) -> CertificationRecord:
    """Recompute all density properties from scratch.

    Grid checks for positivity/oscillation/endpoints, endpoint-graded
    adaptive quadrature of the raw evaluator for the half masses; nothing
    is reused from the construction bookkeeping.
    """
    xs = np.linspace(0.0, 1.0, n_grid + 1)
    vals = np.asarray(profile.density(xs), dtype=float)
    rho_min = float(vals.min())
    rho_span = float(vals.max() - vals.min())
    max_jump = float(np.abs(np.diff(vals)).max())

    fn = lambda t: float(np.asarray(profile.density(t)))
    m_left = endpoint_graded_quad(fn, 0.0, 0.5)
    m_right = endpoint_graded_quad(fn, 0.5, 1.0)
    r_left = abs(m_left - 0.5)
    r_right = abs(m_right - 0.5)

    e0 = abs(float(np.asarray(profile.density(0.0))) - 1.0)
    e1 = abs(float(np.asarray(profile.density(1.0))) - 1.0)

    g_vals = np.asarray(profile.cumulative(xs), dtype=float)
    g0 = abs(float(g_vals[0]))
    g1 = abs(float(g_vals[-1]) - 1.0)
    increasing = bool((np.diff(g_vals) > 0.0).all())

    return CertificationRecord(
        rho_min=rho_min,
        rho_span=rho_span,
        half_mass_residuals=(r_left, r_right),
        endpoint_residuals=(e0, e1),
        cumulative_residuals=(g0, g1),
        above_half=rho_min > 0.5,
        balanced_halves=max(r_left, r_right) <= 1e-9,
        bounded_oscillation=rho_span < 0.5,
        unit_endpoints=max(e0, e1) <= 1e-9,
        cumulative_ok=g0 <= 1e-12 and g1 <= 1e-9 and increasing,
        max_grid_jump=max_jump,
    )


def uniform_profile() -> DensityProfile:
    """The constant density 1 (Lebesgue), with exact cumulative g(x) = x."""
    fn = lambda x: np.ones_like(np.asarray(x, dtype=float))
    anti = lambda x: np.asarray(x, dtype=float).copy()
    profile = DensityProfile(fn, anti, MAX_PIN, None, "lebesgue")
    profile.certification = certify(profile)
    return profile
