import numpy as np
import pytest

from circlemaps.maps import doubling_map
from circlemaps.transfer import (
    GridFunction,
    birkhoff_average,
    fixed_point_iterate,
    invariance_residual,
    transfer_apply,
)


# -- grid functions --------------------------------------------------------


def test_grid_function_shape_check():
    with pytest.raises(ValueError):
        GridFunction(8, np.ones(8))
    with pytest.raises(ValueError):
        GridFunction(8, np.array([np.nan] + [1.0] * 8))


def test_grid_function_interpolates_linearly():
    h = GridFunction.from_callable(lambda x: np.asarray(x, dtype=float), 16)
    assert float(h(0.33)) == pytest.approx(0.33, abs=1e-15)
    assert h.mass == pytest.approx(0.5, abs=1e-15)


def test_renormalize():
    h = GridFunction.from_callable(lambda x: np.full_like(np.asarray(x, dtype=float), 4.0), 16)
    assert h.renormalized().mass == pytest.approx(1.0, abs=1e-15)
    zero = GridFunction(4, np.zeros(5))
    with pytest.raises(ValueError):
        zero.renormalized()


# -- operator on the doubling map --------------------------------------------


def test_doubling_preserves_constants():
    f = doubling_map()
    h = GridFunction.from_callable(lambda x: np.ones_like(np.asarray(x, dtype=float)), 2**10)
    assert np.abs(transfer_apply(f, h).values - 1.0).max() == 0.0


def test_doubling_pushes_identity_function():
    f = doubling_map()
    h = GridFunction.from_callable(lambda x: np.asarray(x, dtype=float), 2**10)
    got = transfer_apply(f, h).values
    xs = h.xs
    assert np.abs(got - (0.5 * xs + 0.25)).max() <= 1e-15


# -- operator laws -------------------------------------------------------------


def random_smooth_grid_function(rng, n, modes=8, amplitude=0.2):
    """Random positive trigonometric density sampled onto the grid."""
    xs = np.linspace(0.0, 1.0, n + 1)
    vals = np.ones(n + 1)
    for k in range(1, modes + 1):
        a, b = rng.uniform(-amplitude, amplitude, 2)
        vals += (a * np.cos(2 * np.pi * k * xs) + b * np.sin(2 * np.pi * k * xs)) / k**2
    return GridFunction(n, vals)


def test_mass_positivity_linearity_doubling(rng):
    f = doubling_map()
    n = 2**12
    for _ in range(20):
        h = random_smooth_grid_function(rng, n)
        ph = transfer_apply(f, h)
        assert abs(ph.mass - h.mass) <= 1e-12
        assert ph.values.min() >= 0.0
    h1 = random_smooth_grid_function(rng, n)
    h2 = random_smooth_grid_function(rng, n)
    combo = GridFunction(n, 0.3 * h1.values + 1.7 * h2.values)
    lhs = transfer_apply(f, combo).values
    rhs = 0.3 * transfer_apply(f, h1).values + 1.7 * transfer_apply(f, h2).values
    assert np.abs(lhs - rhs).max() <= 1e-12


def test_mass_conservation_acip_map(acip_maps, rng):
    # exact-preimage evaluation keeps the pushforward mass identity at the
    # quadrature level of the trapezoid rule on a fine grid
    f = acip_maps["almost-lipschitz"]
    n = 2**16
    for _ in range(3):
        h = random_smooth_grid_function(rng, n)
        ph = transfer_apply(f, h)
        assert abs(ph.mass - h.mass) <= 1e-8


def test_mass_error_for_rough_inputs_is_quadrature_limited(acip_maps, rng):
    # piecewise-linear noise composed with unaligned preimages leaves the
    # trapezoid rule with O(n^-1/2) error; the operator itself still
    # preserves the exact integral (checked against a refined rule)
    f = acip_maps["almost-lipschitz"]
    n = 2**12
    h = GridFunction(n, rng.uniform(0.0, 1.0, n + 1))
    ph = transfer_apply(f, h)
    assert abs(ph.mass - h.mass) <= 1e-3
    xs = np.linspace(0.0, 1.0, 8 * n + 1)
    y1, y2 = f.inv1(xs), f.inv2(xs)
    fine = h(y1) / np.asarray(f.deriv1(y1)) + h(y2) / np.asarray(f.deriv2(y2))
    assert abs(np.trapezoid(fine, dx=1.0 / (8 * n)) - h.mass) <= 8.0 * abs(ph.mass - h.mass)


# -- invariance -----------------------------------------------------------------


def test_unit_density_invariant_under_doubling(profiles):
    assert invariance_residual(doubling_map(), profiles["zero"], 2**10) == 0.0


@pytest.mark.parametrize("name", ["holder-0.5", "holder-0.25", "almost-lipschitz", "log-nondini"])
def test_acip_invariance(acip_maps, profiles, name):
    assert invariance_residual(acip_maps[name], profiles[name], 2**12) <= 5e-6


def test_lebesgue_member_invariance(member_cache):
    from circlemaps.densities import uniform_profile

    leb = uniform_profile()
    assert invariance_residual(member_cache("holder-0.5", 1), leb, 2**12) <= 5e-6


# -- fixed-point iteration ---------------------------------------------------------


def test_doubling_iteration_flattens_fourier_mode():
    f = doubling_map()
    h0 = GridFunction.from_callable(
        lambda x: 1.0 + np.sin(2 * np.pi * np.asarray(x, dtype=float)) / 4.0, 2**12
    )
    h, hist = fixed_point_iterate(f, h0, 30)
    assert hist[-1] <= 1e-6
    assert np.abs(h.values - 1.0).max() <= 1e-6


def test_iteration_recovers_density(acip_maps, profiles):
    name = "almost-lipschitz"
    f, prof = acip_maps[name], profiles[name]
    h0 = GridFunction.from_callable(lambda x: np.ones_like(np.asarray(x, dtype=float)), 2**12)
    h, hist = fixed_point_iterate(f, h0, 40)
    target = np.asarray(prof.density(h.xs), dtype=float)
    assert np.abs(h.values - target).max() <= 1e-3
    # burn-in decay is observed (reported, not guaranteed)
    assert hist[-1] < hist[0]


def test_iteration_rejects_signed_input():
    f = doubling_map()
    h0 = GridFunction(8, np.linspace(-1.0, 1.0, 9))
    with pytest.raises(ValueError):
        fixed_point_iterate(f, h0, 3)


# -- orbit averages ------------------------------------------------------------------


def test_birkhoff_degenerate_fixed_point():
    f = doubling_map()
    assert birkhoff_average(f, lambda x: np.asarray(x, dtype=float), 0.0, 10**3) == 0.0


def test_birkhoff_requires_long_orbits():
    with pytest.raises(ValueError):
        birkhoff_average(doubling_map(), lambda x: x, 0.5, 10)


def test_float_doubling_orbits_collapse():
    # binary doubling shifts mantissa bits out: float orbits of the exact
    # doubling map reach the fixed point 0 in at most ~53 steps, so long
    # orbit averages are meaningless for this one map
    f = doubling_map()
    orbit = f.iterate(1.0 / 3.0, 60)
    assert orbit[-1] == 0.0


def test_birkhoff_half_indicator_on_acip_map(acip_maps, rng):
    f = acip_maps["holder-0.5"]
    seeds = rng.uniform(0.05, 0.95, 4)
    avgs = birkhoff_average(f, lambda x: (x < 0.5).astype(float), seeds, 2 * 10**4)
    # the invariant measure gives [0, 1/2) mass exactly 1/2
    assert np.abs(avgs - 0.5).max() <= 0.05
