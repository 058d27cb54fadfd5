"""Distortion growth over injectivity domains and the Dini dichotomy test.

Distortion of the k-th iterate is the sup over injectivity domains and
point pairs of log((f^k)'(x) / (f^k)'(y)).  Maps whose first-branch slope
is 2 + 2 omega near 0 admit an explicit witness pair (0, x_k) in the
leftmost domain whose log-derivative gap is bounded below by a geometric
sum of modulus values: the gap stays bounded exactly when the modulus is
Dini-integrable, and grows without bound otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .maps import ExpandingCircleMap
from .moduli import Modulus, dini_classify


@dataclass(frozen=True)
class DistortionLevel:
    k: int
    value: float
    exhaustive: bool
    n_domains: int
    witness_value: Optional[float] = None


@dataclass
class DistortionReport:
    levels: list
    witness_points: dict
    witness_values: dict
    lower_bounds: dict
    lam: float
    sig: float
    scale_constant: float
    cutoff: float
    verdict: str = "inconclusive"
    plateau_tol: float = 0.05

    def rows(self):
        """(k, D_k, witness, lower_bound) rows for delimited export."""
        ks = sorted(
            {lv.k for lv in self.levels}
            | set(self.witness_values)
            | set(self.lower_bounds)
        )
        d_by_k = {lv.k: lv.value for lv in self.levels}
        out = []
        for k in ks:
            out.append(
                (
                    k,
                    d_by_k.get(k, float("nan")),
                    self.witness_values.get(k, float("nan")),
                    self.lower_bounds.get(k, float("nan")),
                )
            )
        return out

    def as_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "lam": self.lam,
            "sig": self.sig,
            "scale_constant": self.scale_constant,
            "cutoff": self.cutoff,
            "plateau_tol": self.plateau_tol,
            "levels": [
                {
                    "k": lv.k,
                    "value": lv.value,
                    "exhaustive": lv.exhaustive,
                    "n_domains": lv.n_domains,
                }
                for lv in self.levels
            ],
            "witness_values": {str(k): v for k, v in sorted(self.witness_values.items())},
            "lower_bounds": {str(k): v for k, v in sorted(self.lower_bounds.items())},
        }


def _word_bits(words, i, k):
    """Bit i (from the most significant of k) of each itinerary word."""
    return (words >> (k - 1 - i)) & 1


def chain_log_derivative(f: ExpandingCircleMap, x, words, k: int):
    """Sum of log f'(f^i x) over i < k, branch-selected by the itinerary.

    Following the symbolic word instead of comparing positions against the
    breakpoint removes the ambiguity at domain endpoints, whose orbits hit
    the breakpoint exactly.
    """
    x = np.asarray(x, dtype=float).copy()
    words = np.asarray(words)
    total = np.zeros_like(x)
    for i in range(k):
        bits = _word_bits(words, i, k)
        on2 = bits == 1
        on1 = ~on2
        d = np.empty_like(x)
        nxt = np.empty_like(x)
        if on1.any():
            # forward drift can push a point a hair past its symbolic
            # domain; the itinerary is authoritative, so clip into it
            z = np.clip(x[on1], 0.0, f.a)
            nxt[on1], d[on1] = f.branch_step(1, z)
        if on2.any():
            z = np.clip(x[on2], f.a, 1.0)
            nxt[on2], d[on2] = f.branch_step(2, z)
        total += np.log(d)
        x = np.clip(nxt, 0.0, 1.0)
    return total


def _domains_for_words(f: ExpandingCircleMap, words, k: int):
    """Endpoints of the injectivity domains with the given itinerary words."""
    words = np.asarray(words)
    lo = np.zeros(words.shape, dtype=float)
    hi = np.ones(words.shape, dtype=float)
    for i in range(k - 1, -1, -1):
        bits = _word_bits(words, i, k)
        on2 = bits == 1
        on1 = ~on2
        for arr in (lo, hi):
            if on1.any():
                arr[on1] = np.asarray(f.inv1(arr[on1]), dtype=float)
            if on2.any():
                arr[on2] = np.asarray(f.inv2(arr[on2]), dtype=float)
    return lo, hi


def witness_sequence(f: ExpandingCircleMap, k: int):
    """Witness point x_k and the log-derivative gap of the pair (0, x_k).

    x_k is the k-fold first-branch pullback of the pinned-slope cutoff; its
    forward orbit climbs back through the pinned region where the slope is
    2 + 2 omega, so the gap against the fixed point 0 (slope exactly 2)
    accumulates one modulus value per step.
    """
    t_cut = f.provenance.get("bump_cutoff")
    if t_cut is None:
        raise ValueError("map lacks pinned-slope provenance; witness pair undefined")
    if k == 0:
        return float(t_cut), 0.0
    z = float(t_cut)
    total = 0.0
    for _ in range(k):
        z = float(np.asarray(f.inv1(z)))
        d = float(np.asarray(f.deriv_branch(1, z)))
        total += math.log1p(0.5 * d - 1.0)  # log(d / 2)
    return z, total


def lower_bound(omega: Modulus, sigma: float, C: float, k: int) -> float:
    """Geometric-sum floor (2/sigma) * sum_{j<=k} omega(C sigma^-j)."""
    if sigma <= 1.0:
        raise ValueError("sigma must exceed 1")
    if not 0.0 < C <= 1.0:
        raise ValueError("scale constant must lie in (0, 1]")
    if k == 0:
        return 0.0
    js = np.arange(1, k + 1)
    with np.errstate(under="ignore"):
        args = C * np.exp(-js * math.log(sigma))
    return float(2.0 / sigma * np.asarray(omega(args), dtype=float).sum())


def distortion_level(
    f: ExpandingCircleMap,
    k: int,
    samples_per_domain: int = 4,
    domain_cap: int = 2**14,
    rng=None,
) -> DistortionLevel:
    """Max over (sampled) injectivity domains of the within-domain log-derivative spread.

    All 2^k domains are enumerated while 2^k <= domain_cap; beyond that a
    stratified random sample of itineraries is used, always including the
    leftmost domain.  When the map carries pinned-slope provenance the
    witness pair (0, x_k) is added to the leftmost domain so unbounded
    growth stays detectable far past exhaustive levels.
    """
    if k < 1:
        raise ValueError("level must be >= 1")
    if k > 62:
        raise ValueError("level too deep for integer itineraries")
    if samples_per_domain < 2:
        raise ValueError("need at least the two endpoints per domain")

    exhaustive = 2**k <= domain_cap
    if exhaustive:
        part = f.injectivity_domains(k, cap=62)
        lo = part.endpoints[:-1]
        hi = part.endpoints[1:]
        words = np.arange(2**k, dtype=np.int64)
    else:
        rng = rng or np.random.default_rng(0)
        n_random = max(domain_cap - 1, 1)
        words = np.unique(
            np.concatenate(
                [[0], rng.integers(0, 2**k, size=n_random, dtype=np.int64)]
            )
        )
        lo, hi = _domains_for_words(f, words, k)

    fractions = np.linspace(0.0, 1.0, samples_per_domain)
    pts = lo[:, None] + (hi - lo)[:, None] * fractions[None, :]
    n_dom, m = pts.shape
    flat = pts.reshape(-1)
    word_rows = np.repeat(words, m)
    sums = chain_log_derivative(f, flat, word_rows, k).reshape(n_dom, m)
    spreads = sums.max(axis=1) - sums.min(axis=1)
    value = float(spreads.max())

    wit = None
    if f.provenance.get("bump_cutoff") is not None:
        _, wit = witness_sequence(f, k)
        value = max(value, wit)

    return DistortionLevel(k, value, exhaustive, int(n_dom), wit)


def classify_distortion(
    f: ExpandingCircleMap,
    omega: Modulus,
    k_max: int = 40,
    domain_cap: int = 2**14,
    plateau_tol: float = 0.05,
    samples_per_domain: int = 4,
) -> tuple[str, DistortionReport]:
    """Bounded/unbounded verdict against the Dini dichotomy.

    Unbounded: the witness gap keeps growing over the last quarter of
    levels while staying above a growing geometric-sum floor.  Bounded: the
    measured distortion plateaus over the last half of levels and the
    modulus is Dini-integrable.  Anything else is reported inconclusive
    rather than guessed.
    """
    if k_max < 20:
        raise ValueError("k_max must be >= 20")
    t_cut = f.provenance.get("bump_cutoff")
    scale_c = float(t_cut) if t_cut is not None else 1.0

    ks = sorted({k_max // 4, k_max // 2, (3 * k_max) // 4, k_max})
    witness_points: dict = {}
    witness_values: dict = {}
    bounds: dict = {}
    for k in ks:
        bounds[k] = lower_bound(omega, f.sig, scale_c, k)
        if t_cut is not None:
            x_k, w_k = witness_sequence(f, k)
            witness_points[k] = x_k
            witness_values[k] = w_k

    levels = [
        distortion_level(f, k, samples_per_domain=samples_per_domain, domain_cap=domain_cap)
        for k in (k_max // 2, k_max)
    ]
    d_half, d_full = levels[0].value, levels[1].value

    dini = dini_classify(omega)

    verdict = "inconclusive"
    if witness_values:
        w_grow = witness_values[k_max] - witness_values[(3 * k_max) // 4]
        lb_grow = bounds[k_max] - bounds[k_max // 2]
        dominates = all(
            witness_values[k] >= bounds[k] - 1e-9 for k in witness_values
        )
        if w_grow > plateau_tol and lb_grow > plateau_tol and dominates:
            verdict = "unbounded"
    if verdict == "inconclusive":
        if (d_full - d_half) <= plateau_tol and dini.is_dini:
            verdict = "bounded"

    report = DistortionReport(
        levels=levels,
        witness_points=witness_points,
        witness_values=witness_values,
        lower_bounds=bounds,
        lam=f.lam,
        sig=f.sig,
        scale_constant=scale_c,
        cutoff=float(t_cut) if t_cut is not None else float("nan"),
        verdict=verdict,
        plateau_tol=plateau_tol,
    )
    return verdict, report
