import math

import numpy as np
import pytest
from scipy.integrate import quad

from circlemaps.moduli import (
    canonical_modulus_estimate,
    dini_classify,
    equivalent,
    is_in_K,
    make_almost_lipschitz,
    make_holder,
    make_log_nondini,
    make_zero,
    parse_modulus,
    scaled,
)


# -- family values -----------------------------------------------------


def test_holder_identity_value():
    om = make_holder(1.0, 1.0)
    assert float(om(0.5)) == 0.5


def test_holder_sqrt_value():
    om = make_holder(0.5, 1.0)
    assert abs(float(om(0.25)) - 0.5) < 1e-15


def test_holder_cutoff_from_level_rule():
    assert make_holder(0.5, 1.0).cutoff == 1.0 / 64.0
    # small Holder constants leave the whole interval below the level
    assert make_holder(1.0, 0.05).cutoff == 1.0


def test_holder_rejects_bad_exponent():
    with pytest.raises(ValueError):
        make_holder(2.0, 1.0)
    with pytest.raises(ValueError):
        make_holder(0.0, 1.0)
    with pytest.raises(ValueError):
        make_holder(0.5, -1.0)


def test_log_family_values():
    om = make_log_nondini()
    assert abs(float(om(1.0)) - 1.0) < 1e-12
    assert abs(float(om(math.exp(-7.0))) - 0.125) < 1e-15
    assert float(om(0.0)) == 0.0
    assert om.cutoff == math.exp(-7.0)


def test_almost_lipschitz_values():
    om = make_almost_lipschitz()
    assert abs(float(om(1.0)) - 1.0) < 1e-15
    assert float(om(0.0)) == 0.0
    # cutoff solves t (1 - ln t) = 1/8
    t = om.cutoff
    assert abs(t * (1.0 - math.log(t)) - 0.125) < 1e-12


def test_primitives_match_quadrature():
    for om in (make_holder(0.25, 1.0), make_almost_lipschitz(), make_log_nondini()):
        for x in (1e-6, 1e-3, om.cutoff, 0.3):
            ref, err = quad(lambda t: float(om(t)), 0.0, x, limit=400)
            # the closed forms are exact; quad's own error estimate caps
            # how sharply it can arbitrate
            assert abs(float(om.primitive(x)) - ref) < max(1e-12, 5.0 * err), om.family


# -- class membership --------------------------------------------------


@pytest.mark.parametrize("name", ["holder-0.5", "holder-0.25", "almost-lipschitz", "log-nondini", "zero"])
def test_builtins_in_class(moduli, name):
    report = is_in_K(moduli[name], n_samples=4096)
    assert report.passed, report


def test_convex_fails_concavity():
    report = is_in_K(lambda t: np.asarray(t) ** 2, n_samples=1024)
    assert not report.midpoint_concave
    assert report.worst_sample is not None


def test_constant_fails_vanishing():
    report = is_in_K(lambda t: np.ones_like(np.asarray(t, dtype=float)), n_samples=1024)
    assert not report.vanishes_at_zero


def test_decreasing_fails_monotonicity():
    report = is_in_K(lambda t: -np.asarray(t, dtype=float), n_samples=1024)
    assert not report.monotone


# -- Dini classification ----------------------------------------------


def test_dini_holder_integrals():
    for alpha in (0.25, 0.5, 1.0):
        res = dini_classify(make_holder(alpha, 1.0), sigma=2.0, k_max=1000)
        assert res.verdict == "dini"
        assert abs(res.integral - 1.0 / alpha) <= 1e-8


def test_dini_almost_lipschitz_analytic_value():
    res = dini_classify(make_almost_lipschitz())
    assert res.verdict == "dini"
    # integral of (1 + ln(1/t)) over (0, 1] is exactly 2
    assert abs(res.integral - 2.0) <= 1e-8


def test_log_family_diverges_with_harmonic_trace():
    res = dini_classify(make_log_nondini(), sigma=2.0, k_max=10**4)
    assert res.verdict == "non_dini"
    sums = res.partial_sums
    ks = res.ks
    # independent check of the trace against direct summation
    direct = np.cumsum(np.asarray(make_log_nondini()(2.0 ** -np.arange(1.0, 201.0))))
    assert np.abs(sums[:200] - direct).max() < 1e-12
    # harmonic-type growth: S_k ~ ln(k)/ln(2)
    k_hi, k_lo = 1000, 100
    growth = sums[k_hi - 1] - sums[k_lo - 1]
    assert abs(growth - math.log(k_hi / k_lo) / math.log(2.0)) < 0.2


def test_verdicts_agree_across_sigma(moduli):
    for name, om in moduli.items():
        v2 = dini_classify(om, sigma=2.0).verdict
        v3 = dini_classify(om, sigma=3.0).verdict
        assert v2 == v3, name


def test_dini_scale_consistency():
    base = dini_classify(make_holder(0.5, 1.0))
    for c in (0.5, 2.0):
        res = dini_classify(scaled(make_holder(0.5, 1.0), c))
        assert res.verdict == "dini"
        assert abs(res.integral - c * base.integral) <= 1e-6 * abs(c * base.integral)


def test_zero_modulus_is_dini_with_zero_integral():
    res = dini_classify(make_zero())
    assert res.verdict == "dini"
    assert res.integral == 0.0


def test_dini_parameter_validation():
    with pytest.raises(ValueError):
        dini_classify(make_zero(), sigma=1.0)
    with pytest.raises(ValueError):
        dini_classify(make_zero(), k_max=5)


# -- equivalence --------------------------------------------------------


def test_equivalent_scaled_pair():
    res = equivalent(make_holder(0.5, 1.0), make_holder(0.5, 3.0))
    assert res.equivalent
    assert abs(res.lo - 1.0 / 3.0) < 1e-12 and abs(res.hi - 1.0 / 3.0) < 1e-12


def test_equivalent_reflexive():
    om = make_almost_lipschitz()
    res = equivalent(om, om)
    assert res.equivalent and res.lo == 1.0 and res.hi == 1.0


def test_not_equivalent_different_exponents():
    res = equivalent(make_holder(1.0, 1.0), make_holder(0.5, 1.0), t_min=1e-8)
    assert not res.equivalent
    assert abs(res.lo - 1e-4) < 1e-10  # ratio sqrt(t) at the smallest scale
    # the ratio degrades further as the scale floor shrinks
    finer = equivalent(make_holder(1.0, 1.0), make_holder(0.5, 1.0), t_min=1e-12)
    assert finer.lo < res.lo


def test_equivalent_symmetry_inverts_bounds():
    a, b = make_holder(0.5, 1.0), make_almost_lipschitz()
    fw = equivalent(a, b)
    bw = equivalent(b, a)
    assert abs(fw.lo * bw.hi - 1.0) < 1e-9
    assert abs(fw.hi * bw.lo - 1.0) < 1e-9


def test_equivalent_scaling_invariance():
    a, b = make_holder(0.5, 1.0), make_almost_lipschitz()
    base = equivalent(a, b)
    both = equivalent(scaled(a, 2.0), scaled(b, 2.0))
    assert abs(base.lo - both.lo) < 1e-9 and abs(base.hi - both.hi) < 1e-9


def test_equivalent_guards_zero_denominator():
    res = equivalent(make_holder(0.5, 1.0), make_zero())
    assert not res.equivalent and math.isinf(res.hi)


# -- canonical modulus estimation ---------------------------------------


def test_estimate_constant_function_is_zero():
    est = canonical_modulus_estimate(
        lambda x: np.full_like(np.asarray(x, dtype=float), 3.7),
        scales=[0.25, 0.125, 0.0625],
        samples_per_scale=128,
    )
    assert np.all(est.values == 0.0)


def test_estimate_linear_function_recovers_slope():
    m = 1.7
    scales = np.array([0.25, 0.125, 0.0625])
    est = canonical_modulus_estimate(
        lambda x: m * np.asarray(x, dtype=float), scales, samples_per_scale=128
    )
    assert np.all(est.values <= m * est.scales + 1e-12)
    assert np.all(est.values >= 0.99 * m * est.scales)


def test_estimate_against_bruteforce_oracle():
    om = make_holder(0.5, 1.0)
    t_cut = om.cutoff

    def fn(x):
        x = np.asarray(x, dtype=float)
        return 2.0 + 2.0 * np.asarray(om(np.minimum(x, t_cut)), dtype=float)

    scales = np.array([2.0**-j for j in range(7, 17)])
    scales = scales[(scales >= 1e-5) & (scales <= t_cut)]
    est = canonical_modulus_estimate(fn, scales, samples_per_scale=256)

    # brute-force pair enumeration, spacing t/64 per scale; like the
    # estimator it is a lower bound for the true sup 2*omega(t), so it
    # validates the closed form from below while concavity caps from above
    for t, got in zip(est.scales, est.values):
        h = t / 64.0
        xs = np.arange(0.0, t_cut + h, h)
        vals = fn(xs)
        oracle = max(np.abs(vals[s:] - vals[:-s]).max() for s in range(1, 65))
        true_sup = 2.0 * float(om(t))
        assert oracle <= true_sup * (1.0 + 1e-12)
        assert oracle >= 0.98 * true_sup
        assert got <= true_sup * (1.0 + 1e-12)
        # the sampled sup is tight for concave bumps anchored at 0
        assert 0.9 <= got / true_sup <= 1.0 + 1e-9


def test_estimate_values_monotone_in_scale():
    est = canonical_modulus_estimate(
        lambda x: np.sin(7 * np.asarray(x, dtype=float)),
        scales=[0.5, 0.25, 0.125, 0.0625],
        samples_per_scale=128,
    )
    ordered = est.values[np.argsort(est.scales)]
    assert np.all(np.diff(ordered) >= -1e-15)


def test_estimate_rejects_thin_sampling():
    with pytest.raises(ValueError):
        canonical_modulus_estimate(lambda x: x, [0.5], samples_per_scale=10)


# -- descriptors ---------------------------------------------------------


def test_parse_holder_descriptor():
    om = parse_modulus("holder:alpha=0.5,C=1")
    assert om.family == "holder" and om.params["alpha"] == 0.5
    assert om.descriptor == "holder:C=1,alpha=0.5"


def test_parse_plain_families():
    assert parse_modulus("log-nondini").family == "log-nondini"
    assert parse_modulus("almost-lipschitz").family == "almost-lipschitz"
    assert parse_modulus("zero").family == "zero"


def test_parse_rejects_unknown_and_malformed():
    with pytest.raises(ValueError):
        parse_modulus("exp:rate=2")
    with pytest.raises(ValueError):
        parse_modulus("holder:alpha")
    with pytest.raises(ValueError):
        parse_modulus("holder")
    with pytest.raises(ValueError):
        parse_modulus("zero:x=1")
