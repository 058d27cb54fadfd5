"""Map constructions: density-driven and Lebesgue-preserving extensions.

Two routes produce expanding circle maps here.

* ``build_acip_map``: from a certified density rho, the first branch is
  twice the cumulative g and the second branch inverts h = g - x/2 at
  g(x) - g(1/2); the resulting map preserves the measure rho dx and its
  derivative inherits the regularity of rho.

* ``lebesgue_extend``: any expanding diffeomorphism of [0, a] onto [0, 1]
  extends uniquely to a Lebesgue-preserving full-branch map through the
  inverse-branch identity inv2(y) = a + y - inv1(y).  The extension is a
  smooth circle map exactly when the slope compatibility condition
  s0 = sa / (sa - 1) holds at the endpoints.

Each closed-form route has an independent ODE cross-check: the second
branch also solves an explicit first-order ODE, integrated here with
fixed-step RK4.
"""

from __future__ import annotations

import math
from typing import Optional

import numpy as np

from .densities import CertificationError, DensityProfile, certify
from .maps import ExpandingCircleMap
from .moduli import Modulus
from .piecewise import PiecewiseFunction, bump_piece, const_piece, smoothstep_piece
from .solvers import bisect_root, invert_monotone, rk4_path


def build_acip_map(profile: DensityProfile) -> ExpandingCircleMap:
    """Expanding circle map preserving the measure with density ``profile``.

    The breakpoint is 1/2; branch one is 2 g, branch two solves
    h(f2(x)) = g(x) - g(1/2) for the strictly increasing h(z) = g(z) - z/2.
    All inversions are monotone solves to value residual ~1e-15.
    """
    cert = profile.certification or certify(profile)
    if not cert.passed:
        raise CertificationError(
            f"density must satisfy all properties before map construction: {cert.as_dict()}"
        )
    rho = profile.density
    g = profile.cumulative
    # anchoring the second branch at the computed half mass (not the exact
    # 0.5) makes the breakpoint preimages come out bit-exact, keeping the
    # derivative gluing residual at machine level
    g_half = float(np.asarray(g(0.5)))
    g_one = float(np.asarray(g(1.0)))

    def h(z):
        return np.asarray(g(z), dtype=float) - 0.5 * np.asarray(z, dtype=float)

    def h_deriv(z):
        return np.asarray(rho(z), dtype=float) - 0.5

    def branch1(x):
        return 2.0 * np.asarray(g(x), dtype=float)

    def deriv1(x):
        return 2.0 * np.asarray(rho(x), dtype=float)

    def branch2(x):
        return invert_monotone(h, np.asarray(g(x), dtype=float) - g_half, 0.0, 1.0, deriv=h_deriv)

    def deriv2(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * np.asarray(rho(x), dtype=float) / (
            2.0 * np.asarray(rho(branch2(x)), dtype=float) - 1.0
        )

    def inv1(y):
        return invert_monotone(g, 0.5 * np.asarray(y, dtype=float), 0.0, 0.5, deriv=rho)

    def inv2(y):
        y = np.asarray(y, dtype=float)
        target = np.asarray(g(y), dtype=float) - 0.5 * y + g_half
        return invert_monotone(g, target, 0.5, 1.0, deriv=rho)

    def step1(x):
        return branch1(x), deriv1(x)

    def step2(x):
        w = branch2(x)
        d = 2.0 * np.asarray(rho(x), dtype=float) / (2.0 * np.asarray(rho(w), dtype=float) - 1.0)
        return w, d

    breakpoints = [profile.cutoff, 0.25, 0.5 - profile.cutoff, 0.5, 0.5 + profile.cutoff, 0.75]
    return ExpandingCircleMap(
        0.5,
        branch1,
        branch2,
        deriv1,
        deriv2,
        inv1,
        inv2,
        step1=step1,
        step2=step2,
        provenance={
            "kind": "acip",
            "modulus": profile.label,
            "bump_cutoff": profile.cutoff,
            "breakpoints": breakpoints,
            "profile": profile,
            "anchors": {"g_half": g_half, "g_one": g_one},
        },
    )


def crosscheck_density_ode(profile: DensityProfile, n_steps: int = 2**16):
    """Integrate the second-branch ODE and compare with the closed form.

    The branch solves y' = 2 rho(x) / (2 rho(y) - 1) with y(1/2) = 0; the
    deviation against the monotone-inversion branch is returned as a sup
    over the step points.  Numerators 2 rho(x) at the fixed RK4 stage
    abscissae are precomputed in one vectorized sweep.
    """
    rho = profile.density
    g = profile.cumulative
    g_half = float(np.asarray(g(0.5)))

    h_step = 0.5 / n_steps
    xs = 0.5 + h_step * np.arange(n_steps + 1)
    xs[-1] = 1.0
    num_nodes = 2.0 * np.asarray(rho(xs), dtype=float)
    num_mids = 2.0 * np.asarray(rho(xs[:-1] + 0.5 * h_step), dtype=float)

    def den(y):
        y = min(max(y, 0.0), 1.0)
        return 2.0 * float(rho(y)) - 1.0

    ys = np.empty(n_steps + 1)
    y = 0.0
    ys[0] = y
    for i in range(n_steps):
        k1 = num_nodes[i] / den(y)
        k2 = num_mids[i] / den(y + 0.5 * h_step * k1)
        k3 = num_mids[i] / den(y + 0.5 * h_step * k2)
        k4 = num_nodes[i + 1] / den(y + h_step * k3)
        y += (h_step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[i + 1] = y

    def h(z):
        return np.asarray(g(z), dtype=float) - 0.5 * np.asarray(z, dtype=float)

    def h_deriv(z):
        return np.asarray(rho(z), dtype=float) - 0.5

    closed = invert_monotone(h, np.asarray(g(xs), dtype=float) - g_half, 0.0, 1.0, deriv=h_deriv)
    return float(np.abs(np.clip(ys, 0.0, 1.0) - closed).max())


def check_extension_condition(slope_at_0: float, slope_at_a: float) -> float:
    """Residual of the endpoint slope compatibility s0 = sa / (sa - 1)."""
    if slope_at_0 <= 1.0 or slope_at_a <= 1.0:
        raise ValueError("both endpoint slopes must exceed 1")
    return abs(slope_at_0 - slope_at_a / (slope_at_a - 1.0))


def lebesgue_extend(
    branch1,
    deriv1,
    a: float,
    inv1=None,
    provenance: Optional[dict] = None,
) -> ExpandingCircleMap:
    """Unique Lebesgue-preserving completion of an expanding first branch.

    Pushing Lebesgue measure of [0, y] through the two inverse branches
    forces inv2(y) = a + y - inv1(y), which pins the second branch: with
    phi(z) = a + branch1(z) - z, the second branch is branch1 o phi^{-1}
    and its derivative is s/(s-1) for s the first-branch slope at the
    matching point.  The result is always a full-branch interval map; the
    circle smoothness check may legitimately fail when the endpoint slope
    condition does not hold.
    """
    if not 0.0 < a < 1.0:
        raise ValueError("breakpoint must lie in (0, 1)")
    e0 = abs(float(np.asarray(branch1(0.0))))
    ea = abs(float(np.asarray(branch1(a))) - 1.0)
    if max(e0, ea) > 1e-9:
        raise ValueError(f"first branch must map [0, {a}] onto [0, 1]; residuals {e0:.2e}, {ea:.2e}")
    sample = np.linspace(0.0, a, 2049)
    dmin = float(np.asarray(deriv1(sample), dtype=float).min())
    if dmin <= 1.0:
        raise ValueError(f"first branch is not expanding: min slope {dmin}")

    if inv1 is None:
        def inv1(y):
            return invert_monotone(branch1, y, 0.0, a, deriv=deriv1)

    def phi(z):
        return a + np.asarray(branch1(z), dtype=float) - np.asarray(z, dtype=float)

    def phi_deriv(z):
        return np.asarray(deriv1(z), dtype=float) - 1.0

    def branch2(x):
        z = invert_monotone(phi, np.asarray(x, dtype=float), 0.0, a, deriv=phi_deriv)
        return np.asarray(branch1(z), dtype=float)

    def deriv2(x):
        z = invert_monotone(phi, np.asarray(x, dtype=float), 0.0, a, deriv=phi_deriv)
        s = np.asarray(deriv1(z), dtype=float)
        return s / (s - 1.0)

    def inv2(y):
        y = np.asarray(y, dtype=float)
        return a + y - np.asarray(inv1(y), dtype=float)

    def step2(x):
        z = invert_monotone(phi, np.asarray(x, dtype=float), 0.0, a, deriv=phi_deriv)
        s = np.asarray(deriv1(z), dtype=float)
        return np.asarray(branch1(z), dtype=float), s / (s - 1.0)

    prov = {"kind": "lebesgue", "a": a}
    prov.update(provenance or {})
    return ExpandingCircleMap(
        a, branch1, branch2, deriv1, deriv2, inv1, inv2, step2=step2, provenance=prov
    )


def crosscheck_lebesgue_ode(f: ExpandingCircleMap, n_steps: int = 2**16):
    """Integrate the slope-transport ODE for the second branch.

    y' = s/(s-1) with s the first-branch slope at branch1^{-1}(y) and
    y(a) = 0.  The branch preimage is tracked with a warm-started scalar
    Newton (the solution moves by one step width per stage, so one or two
    corrections suffice).  Returns (sup deviation from the closed-form
    branch, |y(1) - 1| endpoint residual).
    """
    a = f.a
    branch1, deriv1 = f.branch1, f.deriv1
    state = [0.0]

    def slope_at(y):
        if y <= 0.0:
            z = 0.0
        elif y >= 1.0:
            z = a
        else:
            z = state[0]
            for _ in range(60):
                r = float(np.asarray(branch1(z))) - y
                if abs(r) <= 1e-13:
                    break
                z -= r / float(np.asarray(deriv1(z)))
                if z < 0.0:
                    z = 0.0
                elif z > a:
                    z = a
        state[0] = z
        return float(np.asarray(deriv1(z)))

    def rhs(x, y):
        s = slope_at(min(max(y, 0.0), 1.0))
        return s / (s - 1.0)

    xs, ys = rk4_path(rhs, a, 0.0, 1.0, n_steps)
    closed = np.asarray(f.branch2(xs), dtype=float)
    dev = float(np.abs(np.clip(ys, 0.0, 1.0) - closed).max())
    return dev, abs(float(ys[-1]) - 1.0)


def build_lebesgue_member(omega: Modulus, seed: int) -> ExpandingCircleMap:
    """Lebesgue-preserving circle map whose first-branch slope is 2 + 2 omega near 0.

    The slope profile on [0, 1/2] is the pinned piece 2 + 2 omega, a cubic
    descent to a free hold level L in (1, 2), the hold, and a cubic ascent
    back to exactly 2 at the breakpoint; L is solved by bisection so the
    branch integrates to exactly 1.  Both endpoint slopes equal 2, so the
    slope compatibility condition holds and the extension is a smooth
    circle map.  The seed only moves the interior split points: same
    regularity class, different map.
    """
    t_pin = min(omega.cutoff, 0.125)
    top = 2.0 + 2.0 * float(omega(t_pin))
    rng = np.random.default_rng(seed)
    q_down, q_up = rng.uniform(0.2, 0.4, size=2)
    budget = 0.5 - t_pin
    x1 = t_pin + q_down * budget
    x2 = 0.5 - q_up * budget

    def slope_profile(level):
        return PiecewiseFunction(
            [
                bump_piece(t_pin, 2.0, 2.0, omega),
                smoothstep_piece(t_pin, x1, top, level),
                const_piece(x1, x2, level),
                smoothstep_piece(x2, 0.5, level, 2.0),
            ]
        )

    level = bisect_root(lambda L: slope_profile(L).total - 1.0, 1.01, 2.0, tol=1e-13)
    pf = slope_profile(level)

    def branch1(x):
        return pf.primitive(x)

    def deriv1(x):
        return pf(x)

    def inv1(y):
        return invert_monotone(pf.primitive, np.asarray(y, dtype=float), 0.0, 0.5, deriv=pf)

    return lebesgue_extend(
        branch1,
        deriv1,
        0.5,
        inv1=inv1,
        provenance={
            "modulus": omega.descriptor,
            "seed": int(seed),
            "bump_cutoff": t_pin,
            "hold_level": level,
            "breakpoints": [t_pin, x1, x2, 0.5],
            "omega": omega,
        },
    )
