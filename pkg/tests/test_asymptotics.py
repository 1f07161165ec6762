import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from rkreg import (
    ModelTruth,
    PluginSelectionError,
    PowerSequence,
    StepsizeConfig,
    TrueFunctionals,
    bias_coefficient,
    cosine_model,
    gaussian_kernel,
    logistic_model,
    mwise,
    mwise_ratio,
    optimal_h_coefficient,
    optimal_mwise,
    risk_combinations,
    true_functionals,
    variance_coefficient,
)

KERNEL = gaussian_kernel()
ALL_NAMES = ("NW", "Recursive1", "Recursive2", "Recursive3", "Recursive4")


def numeric_minimum(config, functionals, n=100):
    """Grid scan plus bounded refinement; independent of the closed form."""
    grid = np.geomspace(1e-3, 1e3, 2001)
    values = [mwise(config, functionals, KERNEL, n, c) for c in grid]
    j = int(np.argmin(values))
    result = minimize_scalar(
        lambda c: mwise(config, functionals, KERNEL, n, c),
        bounds=(grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(result.x)


@pytest.fixture(scope="module")
def cos_truth():
    return cosine_model(0.5)


@pytest.fixture(scope="module")
def cos_functionals(cos_truth):
    return true_functionals(cos_truth)


class TestModelTruth:
    def test_product_identity(self, cos_truth):
        xs = np.linspace(-3, 3, 41)
        np.testing.assert_allclose(
            cos_truth.a_fn(xs), cos_truth.r(xs) * cos_truth.f(xs), atol=1e-10
        )

    def test_conditional_second_moment(self, cos_truth):
        xs = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(
            cos_truth.cond_second_moment(xs), np.cos(xs) ** 2 + 0.25, atol=1e-12
        )

    def test_analytic_second_derivatives_match_finite_differences(self, cos_truth):
        numeric = ModelTruth.additive(r=np.cos, f=cos_truth.f, sigma=0.5)
        xs = np.linspace(-2.5, 2.5, 11)
        np.testing.assert_allclose(numeric.a2(xs), cos_truth.a2(xs), atol=1e-6)
        np.testing.assert_allclose(numeric.f2(xs), cos_truth.f2(xs), atol=1e-6)

    def test_logistic_derivatives(self):
        truth = logistic_model(0.2)
        numeric = ModelTruth.additive(r=truth.r, f=truth.f, sigma=0.2)
        xs = np.linspace(-2, 2, 9)
        np.testing.assert_allclose(numeric.a2(xs), truth.a2(xs), atol=1e-6)


class TestTrueFunctionals:
    def test_noise_appears_only_in_variance_gap(self, cos_functionals):
        # i4 - i5 = sigma^2 * int f^2 for additive noise
        expected = 0.25 / (2.0 * math.sqrt(math.pi))
        assert cos_functionals.i4 - cos_functionals.i5 == pytest.approx(expected, abs=1e-8)

    def test_zero_regression_function(self):
        truth = ModelTruth.additive(
            r=lambda x: 0.0 * np.asarray(x), f=cosine_model(0.0).f, sigma=1.0,
            r1=lambda x: 0.0 * np.asarray(x), r2=lambda x: 0.0 * np.asarray(x),
            f1=cosine_model(0.0).f2, f2=cosine_model(0.0).f2,
        )
        f = true_functionals(truth)
        assert f.i2 == pytest.approx(0.0, abs=1e-10)
        assert f.i3 == pytest.approx(0.0, abs=1e-10)
        assert f.i5 == pytest.approx(0.0, abs=1e-10)

    def test_curvature_combination_is_perfect_square(self, cos_truth, cos_functionals):
        combined, _ = quad(
            lambda x: (cos_truth.a2(x) - cos_truth.r(x) * cos_truth.f2(x)) ** 2
            * cos_truth.f(x),
            -np.inf, np.inf, epsabs=1e-10,
        )
        termwise = cos_functionals.i1 + cos_functionals.i3 - 2.0 * cos_functionals.i2
        assert termwise == pytest.approx(combined, abs=1e-8)
        assert termwise >= 0.0


class TestPointwiseConstants:
    def test_bias_vanishes_with_flat_curvature(self):
        # constant regression function: a'' = c f'', so both terms cancel at
        # any point where f'' vanishes (x = 1 for the standard normal)
        base = cosine_model(0.0)
        truth = ModelTruth.additive(
            r=lambda x: 2.0 * np.ones_like(np.asarray(x, dtype=float)),
            f=base.f, sigma=0.3,
            r1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            r2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            f1=base.f2, f2=base.f2,
        )
        for name in ALL_NAMES:
            b = bias_coefficient(StepsizeConfig.by_name(name), truth, 1.0, KERNEL)
            assert b == pytest.approx(0.0, abs=1e-12)

    def test_recursive1_bias_shape(self, cos_truth):
        x = 0.7
        expected = (
            5.0 / (6.0 * cos_truth.f(x))
            * (cos_truth.a2(x) - cos_truth.r(x) * cos_truth.f2(x))
            * KERNEL.mu2
        )
        got = bias_coefficient(StepsizeConfig.recursive1(), cos_truth, x, KERNEL)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_baseline_bias_shape(self, cos_truth):
        x = -0.4
        expected = (
            0.5 / cos_truth.f(x)
            * (cos_truth.a2(x) - cos_truth.r(x) * cos_truth.f2(x))
            * KERNEL.mu2
        )
        got = bias_coefficient(StepsizeConfig.nadaraya_watson(), cos_truth, x, KERNEL)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_recursive1_variance_is_scaled_conditional_variance(self):
        truth = ModelTruth.additive(
            r=np.cos, f=lambda x: np.ones_like(np.asarray(x, dtype=float)), sigma=0.5,
            r1=lambda x: -np.sin(x), r2=lambda x: -np.cos(x),
            f1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            f2=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        )
        got = variance_coefficient(StepsizeConfig.recursive1(), truth, 0.3, KERNEL)
        assert got == pytest.approx(5.0 / 6.0 * 0.25 * KERNEL.R, rel=1e-12)

    def test_baseline_variance_is_conditional_variance(self, cos_truth):
        x = 0.2
        expected = 0.25 / cos_truth.f(x) * KERNEL.R
        got = variance_coefficient(StepsizeConfig.nadaraya_watson(), cos_truth, x, KERNEL)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_degenerate_response_gives_zero_variance(self):
        truth = ModelTruth.additive(
            r=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            f=cosine_model(0.0).f, sigma=0.0,
        )
        got = variance_coefficient(StepsizeConfig.recursive1(), truth, 0.0, KERNEL)
        assert got == pytest.approx(0.0, abs=1e-15)

    def test_nonpositive_density_rejected(self, cos_truth):
        with pytest.raises(ValueError, match="density"):
            bias_coefficient(StepsizeConfig.recursive1(), cos_truth, 60.0, KERNEL)

    def test_singular_constants_rejected(self, cos_truth):
        # a = 1/3 makes 1 - 3a vanish in the variance-tuned density branch
        config = StepsizeConfig(
            "custom",
            PowerSequence(1.0 - 1.0 / 3.0, 1.0),
            PowerSequence(1.0, 1.0),
            bandwidth_exponent=1.0 / 3.0,
        )
        with pytest.raises(ValueError, match="singular"):
            bias_coefficient(config, cos_truth, 0.0, KERNEL)


class TestWeightedRisk:
    def test_recursive1_risk_at_optimum_matches_closed_form(self, cos_functionals):
        f = cos_functionals
        config = StepsizeConfig.recursive1()
        c_star = optimal_h_coefficient(f, config, KERNEL)
        n = 250
        expected = (
            1.25 * 2.0 ** -0.8 * (5.0 / 3.0) ** 1.2
            * (f.i4 - f.i5) ** 0.8
            * (f.i1 + f.i3 - 2.0 * f.i2) ** 0.2
            * KERNEL.theta * n ** -0.8
        )
        assert mwise(config, f, KERNEL, n, c_star) == pytest.approx(expected, rel=1e-10)
        assert optimal_mwise(config, f, KERNEL, n) == pytest.approx(expected, rel=1e-10)

    def test_zero_functionals_give_zero_risk(self):
        f = TrueFunctionals(0.0, 0.0, 0.0, 0.0, 0.0)
        assert mwise(StepsizeConfig.recursive1(), f, KERNEL, 100, 0.5) == 0.0

    @pytest.mark.parametrize("name", ALL_NAMES)
    def test_numeric_minimiser_matches_closed_form(self, name, cos_functionals):
        config = StepsizeConfig.by_name(name)
        c_closed = optimal_h_coefficient(cos_functionals, config, KERNEL)
        c_numeric = numeric_minimum(config, cos_functionals)
        assert abs(c_numeric - c_closed) / c_closed < 1e-6

    def test_convexity_around_optimum(self, cos_functionals):
        config = StepsizeConfig.recursive2()
        c_star = optimal_h_coefficient(cos_functionals, config, KERNEL)
        at = lambda c: mwise(config, cos_functionals, KERNEL, 100, c)
        assert at(0.5 * c_star) > at(c_star)
        assert at(2.0 * c_star) > at(c_star)

    def test_unbalanced_regime_rejected(self, cos_functionals):
        config = StepsizeConfig.recursive1(a=0.3)
        with pytest.raises(ValueError, match="balanced"):
            mwise(config, cos_functionals, KERNEL, 100, 0.5)

    def test_coefficient_ratio_between_configurations(self, cos_functionals):
        c1 = optimal_h_coefficient(cos_functionals, StepsizeConfig.recursive1(), KERNEL)
        c4 = optimal_h_coefficient(cos_functionals, StepsizeConfig.recursive4(), KERNEL)
        assert c4 / c1 == pytest.approx((2.0 / 3.0) ** 0.2, rel=1e-12)

    def test_failure_carries_both_combinations(self):
        f = TrueFunctionals(1.0, 0.0, 0.0, 0.5, 0.5)
        with pytest.raises(PluginSelectionError) as err:
            optimal_h_coefficient(f, StepsizeConfig.recursive4(), KERNEL)
        assert err.value.variance_combination == pytest.approx(0.0)

    def test_bandwidth_coefficient_fixes_limit_constant(self, cos_functionals):
        # n * h(n)^5 is constant and equals the coefficient to the fifth power
        config = StepsizeConfig.recursive1()
        c = optimal_h_coefficient(cos_functionals, config, KERNEL)
        for n in (100, 2000, 10**5):
            h_n = c * n ** -0.2
            assert n * h_n ** 5 == pytest.approx(c ** 5, rel=1e-12)


class TestRiskRatios:
    def test_tuned_for_integrated_error(self):
        ratio = mwise_ratio(StepsizeConfig.recursive1())
        assert ratio == pytest.approx(2.0 ** -0.8 * (5.0 / 3.0) ** 1.2, rel=1e-12)
        assert ratio == pytest.approx(1.06022, abs=1e-5)

    def test_tuned_for_variance(self):
        ratio = mwise_ratio(StepsizeConfig.recursive4())
        assert ratio == pytest.approx(5.0 ** 0.2 * 0.8, rel=1e-12)
        assert ratio == pytest.approx(1.10378, abs=1e-5)

    def test_mixed_configurations_not_comparable(self):
        assert mwise_ratio(StepsizeConfig.recursive2()) is None
        assert mwise_ratio(StepsizeConfig.recursive3()) is None

    def test_baseline_rejected(self):
        with pytest.raises(ValueError):
            mwise_ratio(StepsizeConfig.nadaraya_watson())

    def test_ratio_agrees_with_risk_quotient(self, cos_functionals):
        # independent route: quotient of minimised risks on shared functionals
        n = 400
        base = optimal_mwise(StepsizeConfig.nadaraya_watson(), cos_functionals, KERNEL, n)
        for name in ("Recursive1", "Recursive4"):
            config = StepsizeConfig.by_name(name)
            quotient = optimal_mwise(config, cos_functionals, KERNEL, n) / base
            assert quotient == pytest.approx(mwise_ratio(config), rel=1e-12)

    def test_beta0_weight_minimised_at_one(self):
        # the stepsize-limit factor b^2 (b - 2/5)^(-6/5) dips at b = 1
        grid = np.linspace(0.4001, 4.0, 36000)
        values = grid ** 2 * (grid - 0.4) ** -1.2
        argmin = grid[np.argmin(values)]
        assert argmin == pytest.approx(1.0, abs=1e-3)
        assert values.min() == pytest.approx((5.0 / 3.0) ** 1.2, rel=1e-6)


class TestRiskCombinations:
    def test_baseline_combinations(self):
        f = TrueFunctionals(2.0, 0.5, 1.0, 3.0, 1.5)
        v, b = risk_combinations(f, StepsizeConfig.nadaraya_watson())
        assert v == pytest.approx(1.5)
        assert b == pytest.approx(2.0)

    def test_recursive1_combinations_scale_the_baseline(self):
        f = TrueFunctionals(2.0, 0.5, 1.0, 3.0, 1.5)
        v, b = risk_combinations(f, StepsizeConfig.recursive1())
        assert v == pytest.approx(5.0 / 6.0 * 1.5, rel=1e-12)
        assert b == pytest.approx(25.0 / 9.0 * 2.0, rel=1e-12)
