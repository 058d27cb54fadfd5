import numpy as np
import pytest

from circlemaps.densities import (
    CertificationError,
    build_density,
    certify,
    endpoint_graded_quad,
    profile_from_callable,
    uniform_profile,
)
from circlemaps.moduli import canonical_modulus_estimate, make_holder, make_zero


# -- construction -------------------------------------------------------


@pytest.mark.parametrize("name", ["holder-0.5", "holder-0.25", "almost-lipschitz", "log-nondini"])
def test_builtin_densities_certify(profiles, name):
    cert = profiles[name].certification
    assert cert.passed
    assert max(cert.half_mass_residuals) <= 1e-9
    assert cert.rho_min > 0.5
    assert cert.rho_span < 0.5
    assert max(cert.endpoint_residuals) == 0.0  # endpoints hit 1 exactly


def test_zero_modulus_gives_unit_density(profiles):
    prof = profiles["zero"]
    xs = np.linspace(0.0, 1.0, 1001)
    assert np.abs(prof.density(xs) - 1.0).max() <= 1e-10
    assert np.abs(prof.cumulative(xs) - xs).max() <= 1e-10


def test_density_pinned_to_modulus_near_zero(profiles, moduli):
    for name in ("holder-0.5", "log-nondini"):
        prof, om = profiles[name], moduli[name]
        ts = np.linspace(0.0, prof.cutoff, 257)
        assert np.abs(prof.density(ts) - (1.0 + np.asarray(om(ts)))).max() <= 1e-14


def test_build_rejects_modulus_outside_class():
    bad = make_holder(0.5, 1.0)
    # sabotage the evaluator: convex profile fails membership
    from circlemaps.moduli import Modulus

    convex = Modulus(lambda t: np.asarray(t, dtype=float) ** 2, 0.35, "custom", {})
    with pytest.raises(ValueError):
        build_density(convex)
    assert build_density(bad) is not None


# -- cumulative ---------------------------------------------------------


def test_cumulative_of_unit_density():
    prof = uniform_profile()
    assert prof.cumulative_eval(0.3) == pytest.approx(0.3, abs=1e-15)


def test_cumulative_half_and_total(profiles):
    for name, prof in profiles.items():
        assert abs(float(prof.cumulative_eval(0.5)) - 0.5) <= 1e-9, name
        assert abs(float(prof.cumulative_eval(1.0)) - 1.0) <= 1e-9, name
        assert float(prof.cumulative_eval(0.0)) == 0.0


def test_cumulative_rejects_out_of_domain(profiles):
    with pytest.raises(ValueError):
        profiles["holder-0.5"].cumulative_eval(1.5)


def test_cumulative_two_sided_lipschitz(profiles, rng):
    # mass of an interval is between half and three halves of its length
    for name, prof in profiles.items():
        xs = np.sort(rng.uniform(0.0, 1.0, 400))
        g = np.asarray(prof.cumulative(xs))
        dx = np.diff(xs)
        dg = np.diff(g)
        pos = dx > 0
        assert np.all(dg[pos] >= 0.5 * dx[pos] - 1e-12), name
        assert np.all(dg[pos] <= 1.5 * dx[pos] + 1e-12), name


# -- certification as an independent oracle ------------------------------


def test_certify_accepts_unit_density():
    rec = certify(uniform_profile())
    assert rec.passed
    assert max(rec.half_mass_residuals) <= 1e-13
    assert rec.rho_span == 0.0


def test_certify_rejects_shifted_endpoint():
    # 1 + x - 1/2 integrates to 1 but ends at 3/2, violating unit endpoints
    prof = profile_from_callable(
        lambda x: 0.5 + np.asarray(x, dtype=float),
        antiderivative=lambda x: 0.5 * np.asarray(x, dtype=float) + 0.5 * np.asarray(x, dtype=float) ** 2,
    )
    rec = certify(prof)
    assert not rec.unit_endpoints
    assert not rec.passed


def test_certify_rejects_unbalanced_halves():
    prof = profile_from_callable(
        lambda x: 0.75 + 0.5 * np.asarray(x, dtype=float),
        antiderivative=lambda x: 0.75 * np.asarray(x, dtype=float) + 0.25 * np.asarray(x, dtype=float) ** 2,
    )
    rec = certify(prof)
    assert not rec.balanced_halves


def test_graded_quad_resolves_narrow_endpoint_features():
    # a bump of width 2^-12 at the left endpoint that plain sampling misses
    w = 2.0**-12

    def fn(t):
        return 1.0 + max(0.0, 1.0 - abs(t) / w)

    total = endpoint_graded_quad(fn, 0.0, 0.5)
    assert abs(total - (0.5 + 0.5 * w)) <= 1e-12


def test_smooth_custom_profile_certifies():
    eps = 0.1
    prof = profile_from_callable(
        lambda x: 1.0 + eps * np.sin(4 * np.pi * np.asarray(x, dtype=float)),
        antiderivative=lambda x: np.asarray(x, dtype=float)
        - eps * (np.cos(4 * np.pi * np.asarray(x, dtype=float)) - 1.0) / (4 * np.pi),
        label="smooth-sine",
    )
    rec = certify(prof)
    assert rec.passed


def test_quadrature_backed_cumulative():
    # no antiderivative supplied: dense Simpson + Hermite interpolation
    prof = profile_from_callable(
        lambda x: 1.0 + 0.1 * np.sin(4 * np.pi * np.asarray(x, dtype=float))
    )
    xs = np.linspace(0.0, 1.0, 501)
    exact = xs - 0.1 * (np.cos(4 * np.pi * xs) - 1.0) / (4 * np.pi)
    assert np.abs(np.asarray(prof.cumulative(xs)) - exact).max() <= 1e-12


# -- regularity transfer -------------------------------------------------


def test_density_modulus_matches_source(profiles, moduli):
    for name in ("holder-0.5", "holder-0.25", "almost-lipschitz", "log-nondini"):
        prof, om = profiles[name], moduli[name]
        scales = np.array([2.0**-j for j in range(4, 40)])
        scales = scales[(scales <= prof.cutoff) & (scales >= 1e-9)]
        est = canonical_modulus_estimate(prof.density, scales, samples_per_scale=200)
        lo, hi = est.ratio_against(om)
        assert 0.8 <= lo <= hi <= 1.1, (name, lo, hi)
