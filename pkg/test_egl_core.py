import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq, minimize_scalar
from scipy.stats import ks_2samp, kstest

from conftest import BLADDER_EGL, PARAMETER_GRID, grid_id
from egl_toolkit.core.exceptions import DomainError
from egl_toolkit.models.distribution import EglParams, ExtremeKind, HazardShape, SamplingMethod
from egl_toolkit.services import egl_core
from egl_toolkit.services.competitors import LindleyFamily
from egl_toolkit.services.egl_core import EGLDistribution

LINDLEY_ONE_MEDIAN = 1.146193220621

MOMENT_PARAMS = [
    EglParams(lam=1.0, theta=1.0, alpha=1.0),
    EglParams(lam=1.0, theta=0.5878, alpha=0.6457),
    BLADDER_EGL,
    EglParams(lam=2.0, theta=0.5, alpha=1.5),
    EglParams(lam=0.5, theta=5.0, alpha=3.0),
]


def egl(lam, theta, alpha) -> EGLDistribution:
    return EGLDistribution.from_values(lam, theta, alpha)


def quadrature(dist: EGLDistribution, func, lower=0.0) -> float:
    """Plain scipy quadrature oracle, independent of the tail splitting."""
    value, _ = quad(lambda x: func(x) * dist.pdf(x), lower, math.inf, epsabs=0, epsrel=1e-12, limit=500)
    return value


class TestEvaluation:
    def test_density_at_origin(self):
        assert egl(1, 1, 1).pdf(0.0) == pytest.approx(0.5, rel=1e-15)
        assert egl(2, 0.5, 1.5).pdf(0.0) == pytest.approx(0.5, rel=1e-14)

    def test_density_is_derivative_of_cdf(self):
        dist = EGLDistribution(BLADDER_EGL)
        h = 1e-5
        slope = (dist.cdf(1.0 + h) - dist.cdf(1.0 - h)) / (2 * h)
        assert dist.pdf(1.0) == pytest.approx(slope, rel=1e-7)

    @pytest.mark.parametrize("params", PARAMETER_GRID, ids=grid_id)
    def test_density_integrates_to_one(self, params):
        assert EGLDistribution(params).expect(lambda x: 1.0) == pytest.approx(1.0, abs=1e-8)

    def test_cdf_values(self):
        dist = egl(1, 1, 1)
        assert dist.cdf(0.0) == 0.0
        assert dist.cdf(1.0) == pytest.approx(1.0 - 3.0 / (2.0 * math.e), rel=1e-12)
        assert 0.99 < egl(1.803, 0.093, 1.046).cdf(38.5) < 1.0

    def test_survival_values(self):
        assert egl(1, 1, 1).survival(0.0) == 1.0
        assert egl(1, 1, 1).survival(1.0) == pytest.approx(3.0 / (2.0 * math.e), rel=1e-12)
        assert egl(1, 1, 2).survival(10.0) == pytest.approx(math.exp(-120.0) * 122.0 / 2.0, rel=1e-10)

    @pytest.mark.parametrize(
        "params",
        [EglParams(lam=0.93603, theta=0.58780, alpha=0.64577), *PARAMETER_GRID[:9]],
        ids=grid_id,
    )
    def test_origin_is_exact(self, params):
        dist = EGLDistribution(params)
        assert dist.cdf(0.0) == 0.0
        assert dist.survival(0.0) == 1.0
        assert dist.log_survival(0.0) == 0.0
        assert dist.cumulative_hazard(0.0) == 0.0

    def test_survival_far_in_tail_stays_positive_in_log_space(self):
        dist = egl(1, 1, 2)
        assert dist.survival(100.0) == 0.0
        assert dist.log_survival(100.0) == pytest.approx(-(101.0 ** 2 - 1.0) + math.log1p(101.0 ** 2) - math.log(2.0), rel=1e-12)
        assert dist.cumulative_hazard(100.0) == pytest.approx(-dist.log_survival(100.0))

    def test_vectorized_and_monotone(self):
        dist = EGLDistribution(BLADDER_EGL)
        x = np.linspace(0.0, 50.0, 201)
        cdf = dist.cdf(x)
        assert cdf.shape == x.shape
        assert np.all(np.diff(cdf) >= 0)
        np.testing.assert_allclose(dist.cdf(x) + dist.survival(x), 1.0, rtol=0, atol=1e-14)

    def test_lindley_reduction(self):
        x = np.concatenate([[0.0], np.geomspace(1e-4, 60.0, 200)])
        for lam, theta in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)]:
            np.testing.assert_allclose(
                egl(lam, theta, 1.0).cdf(x), LindleyFamily(theta).cdf(lam * x), rtol=0, atol=1e-12,
            )

    @pytest.mark.parametrize("x", [-1.0, float("nan")])
    def test_negative_argument(self, x):
        with pytest.raises(DomainError):
            egl(1, 1, 1).pdf(x)

    def test_invalid_parameters(self):
        with pytest.raises(ValueError):
            egl(0.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            egl(1.0, -1.0, 1.0)


class TestHazard:
    def test_hazard_at_origin(self):
        for lam, theta, alpha in [(1, 1, 1), (2, 0.5, 1.5), (0.3, 4, 0.2)]:
            assert egl(lam, theta, alpha).hazard(0.0) == pytest.approx(alpha * lam * theta ** 2 / (1 + theta), rel=1e-14)

    def test_hazard_limit(self):
        assert egl(1, 1, 1).hazard(1e8) == pytest.approx(1.0, rel=1e-6)

    def test_hazard_is_density_over_survival(self):
        dist = EGLDistribution(BLADDER_EGL)
        x = np.array([0.1, 1.0, 10.0])
        np.testing.assert_allclose(dist.hazard(x), dist.pdf(x) / dist.survival(x), rtol=1e-12)

    def test_decreasing_hazard(self):
        dist = egl(1, 1, 0.3)
        assert dist.hazard(1000.0) < dist.hazard(0.0)

    @pytest.mark.parametrize(
        "params,shape",
        [
            ((1, 1, 0.3), HazardShape.DECREASING),
            ((1, 1, 2), HazardShape.INCREASING),
            ((1, 0.5, 0.75), HazardShape.UPSIDE_DOWN),
            ((1, 2.5, 0.75), HazardShape.DECREASING),
            (tuple(BLADDER_EGL.as_tuple()), HazardShape.UPSIDE_DOWN),
        ],
    )
    def test_classify_examples(self, params, shape):
        assert egl(*params).classify_hazard_shape() is shape
        assert egl_core.classify_hazard_shape(EglParams.from_sequence(params)) is shape

    def test_classifier_matches_numeric_scan(self):
        rng = np.random.default_rng(20160415)
        for _ in range(50):
            lam = float(np.exp(rng.uniform(np.log(0.1), np.log(5.0))))
            theta = float(np.exp(rng.uniform(np.log(0.05), np.log(5.0))))
            alpha = float(rng.uniform(0.05, 3.0))
            dist = egl(lam, theta, alpha)
            x = np.concatenate([[0.0], np.geomspace(1e-6, 1e8, 1000)]) / lam
            h = dist.hazard(x)
            rel = np.diff(h) / h[:-1]
            signs = np.sign(rel[np.abs(rel) > 1e-12])
            changes = int(np.count_nonzero(np.diff(signs)))
            shape = dist.classify_hazard_shape()
            label = f"{dist!r} classified {shape.value}"
            if shape is HazardShape.INCREASING:
                assert np.all(signs > 0), label
            elif shape is HazardShape.DECREASING:
                assert np.all(signs < 0), label
            else:
                assert signs[0] > 0 and changes == 1, label

    def test_hazard_peak(self):
        dist = egl(1, 0.5, 0.75)
        peak = dist.hazard_peak()
        assert peak > 0
        assert dist.hazard(peak) > dist.hazard(peak * 0.99)
        assert dist.hazard(peak) > dist.hazard(peak * 1.01)
        assert egl(1, 1, 2).hazard_peak() is None


class TestMode:
    def test_interior_mode(self):
        mode = egl(1, 1, 2).mode()
        assert not mode.at_boundary
        assert mode.location == pytest.approx(math.sqrt(1.5) - 1.0, rel=1e-12)

    def test_boundary_mode(self):
        mode = egl(1, 3, 1).mode()
        assert mode.at_boundary
        assert mode.location == 0.0

    def test_mode_scales_with_lambda(self):
        assert egl(2, 1, 2).mode().location == pytest.approx(egl(1, 1, 2).mode().location / 2.0, rel=1e-12)

    @pytest.mark.parametrize("params", [(1, 1, 2), (2, 0.5, 0.9), (0.5, 1.5, 3.0)])
    def test_mode_matches_numeric_argmax(self, params):
        dist = egl(*params)
        mode = dist.mode()
        assert not mode.at_boundary
        found = minimize_scalar(
            lambda x: -dist.log_pdf(x), bounds=(0.0, 10.0 * mode.location + 1.0),
            method="bounded", options={"xatol": 1e-10},
        )
        assert mode.location == pytest.approx(found.x, abs=1e-6)

    def test_functional_api(self):
        assert egl_core.mode(EglParams(lam=1, theta=1, alpha=2)).location == pytest.approx(math.sqrt(1.5) - 1.0)


class TestQuantile:
    def test_quantile_at_zero(self):
        for params in PARAMETER_GRID[:5]:
            assert EGLDistribution(params).quantile(0.0) == 0.0

    def test_lindley_median(self):
        assert egl(1, 1, 1).median() == pytest.approx(LINDLEY_ONE_MEDIAN, abs=1e-10)

    def test_median_matches_bisection(self):
        dist = EGLDistribution(BLADDER_EGL)
        root = brentq(lambda x: dist.cdf(x) - 0.5, 0.0, 100.0, xtol=1e-14, rtol=1e-14)
        assert dist.median() == pytest.approx(root, rel=1e-9)

    def test_median_scales_with_lambda(self):
        assert egl(4, 0.5, 0.8).median() == pytest.approx(egl(1, 0.5, 0.8).median() / 4.0, rel=1e-12)

    @pytest.mark.parametrize("params", PARAMETER_GRID, ids=grid_id)
    def test_quantile_round_trip(self, params):
        dist = EGLDistribution(params)
        gammas = np.array([1e-6, 0.01, 0.1, 0.25, 0.5, 0.75, 0.9, 0.99, 0.999999])
        np.testing.assert_allclose(dist.cdf(dist.quantile(gammas)), gammas, rtol=0, atol=1e-9)
        assert dist.cdf(dist.median()) == pytest.approx(0.5, abs=1e-9)

    def test_isf_avoids_cancellation(self):
        dist = egl(1, 1, 1)
        x = dist.isf(1e-300)
        assert math.isfinite(x)
        assert dist.log_survival(x) == pytest.approx(math.log(1e-300), rel=1e-9)

    def test_large_theta(self):
        # Lindley(800) is close to an exponential with rate 800
        dist = egl(1, 800, 1)
        median = dist.median()
        assert median == pytest.approx(math.log(2.0) / 800.0, rel=0.01)
        assert dist.cdf(median) == pytest.approx(0.5, abs=1e-9)
        upper = dist.isf(1e-12)
        assert dist.log_survival(upper) == pytest.approx(math.log(1e-12), rel=1e-9)

    def test_large_theta_sampling(self):
        theta = 1500.0
        draws = egl(1, theta, 1).sample(2000, seed=8)
        assert np.all(np.isfinite(draws)) and np.all(draws >= 0)
        assert draws.mean() == pytest.approx((theta + 2.0) / (theta * (theta + 1.0)), rel=0.1)

    @pytest.mark.parametrize("gamma", [1.0, -0.1, 1.5, float("nan")])
    def test_out_of_range(self, gamma):
        with pytest.raises(DomainError):
            egl(1, 1, 1).quantile(gamma)


class TestSampling:
    def test_deterministic_per_seed(self):
        dist = EGLDistribution(BLADDER_EGL)
        for method in SamplingMethod:
            first = dist.sample(50, seed=7, method=method)
            second = dist.sample(50, seed=7, method=method)
            np.testing.assert_array_equal(first, second)
            assert np.all(first >= 0)
        assert not np.array_equal(dist.sample(50, seed=7), dist.sample(50, seed=8))

    def test_invalid_size(self):
        with pytest.raises(DomainError):
            egl(1, 1, 1).sample(0, seed=1)

    @pytest.mark.slow
    def test_sample_mean(self):
        x = egl(1, 1, 1).sample(10 ** 6, seed=11)
        se = x.std(ddof=1) / math.sqrt(x.size)
        assert abs(x.mean() - 1.5) < 3 * se

    @pytest.mark.slow
    def test_transform_to_lindley(self):
        lam, theta, alpha = 0.7, 1.3, 0.8
        x = egl(lam, theta, alpha).sample(10 ** 5, seed=21)
        y = np.expm1(alpha * np.log1p(lam * x))
        result = kstest(y, LindleyFamily(theta).cdf)
        assert result.statistic < 1.628 / math.sqrt(y.size)

    @pytest.mark.slow
    def test_methods_agree(self):
        dist = EGLDistribution(BLADDER_EGL)
        inverse = dist.sample(10 ** 5, seed=5, method=SamplingMethod.INVERSE_TRANSFORM)
        transform = dist.sample(10 ** 5, seed=6, method=SamplingMethod.LINDLEY_TRANSFORM)
        assert ks_2samp(inverse, transform).pvalue > 0.01


class TestMoments:
    def test_lindley_mean(self):
        assert egl(1, 1, 1).raw_moment(1) == pytest.approx(1.5, rel=1e-12)
        assert egl(2, 1, 1).mean() == pytest.approx(0.75, rel=1e-12)

    @pytest.mark.parametrize("params", MOMENT_PARAMS, ids=grid_id)
    @pytest.mark.parametrize("k", [1, 2, 3, 4])
    def test_series_matches_quadrature(self, params, k):
        dist = EGLDistribution(params)
        assert dist.raw_moment(k) == pytest.approx(quadrature(dist, lambda x: x ** k), rel=1e-7)

    @pytest.mark.parametrize("params", PARAMETER_GRID, ids=grid_id)
    def test_lindley_transform_mean(self, params):
        # (1 + lambda X)^alpha - 1 is Lindley(theta), whose mean is (theta + 2) / (theta (theta + 1))
        lam, theta, alpha = params.as_tuple()
        value = EGLDistribution(params).expect(lambda x: -math.expm1(alpha * math.log1p(lam * x)))
        assert value == pytest.approx(1.0 / (theta + 1.0) - 2.0 / theta, rel=1e-7)

    def test_summary_measures(self):
        dist = egl(1, 1, 1)
        # Lindley(1): E X^2 = 2 (theta + 3) / (theta^2 (theta + 1)) = 4
        assert dist.variance() == pytest.approx(4.0 - 2.25, rel=1e-10)
        m1, m2, m3 = 1.5, 4.0, 6.0 * (1 + 4) / 2
        var = m2 - m1 ** 2
        assert dist.skewness() == pytest.approx((m3 - 3 * m1 * m2 + 2 * m1 ** 3) / var ** 1.5, rel=1e-9)
        assert dist.kurtosis() > 3.0

    def test_invalid_order(self):
        with pytest.raises(DomainError):
            egl(1, 1, 1).raw_moment(0)

    def test_conditional_moment_at_origin(self):
        dist = EGLDistribution(BLADDER_EGL)
        assert dist.conditional_moment(1, 0.0) == pytest.approx(dist.raw_moment(1), rel=1e-12)

    @pytest.mark.parametrize("k,t", [(1, 1.0), (2, 1.0), (1, 5.0)])
    def test_conditional_moment_matches_quadrature(self, k, t):
        dist = egl(1, 1, 1)
        expected = quadrature(dist, lambda x: x ** k, lower=t) / dist.survival(t)
        assert dist.conditional_moment(k, t) == pytest.approx(expected, rel=1e-8)

    def test_conditional_moment_exceeds_threshold(self):
        assert egl(1, 1, 2).conditional_moment(1, 2.0) > 2.0

    def test_conditional_moment_underflow(self):
        with pytest.raises(DomainError):
            egl(1, 1, 2).conditional_moment(1, 1e4)

    def test_mean_residual_life(self):
        dist = egl(1, 1, 1)
        assert dist.mean_residual_life(0.0) == pytest.approx(dist.mean(), rel=1e-12)
        expected = quadrature(dist, lambda x: x - 1.0, lower=1.0) / dist.survival(1.0)
        assert dist.mean_residual_life(1.0) == pytest.approx(expected, rel=1e-8)
        assert egl_core.mean_residual_life(EglParams(lam=1, theta=1, alpha=1), 1.0) > 0


class TestEntropy:
    @pytest.mark.parametrize("params", MOMENT_PARAMS[:4], ids=grid_id)
    @pytest.mark.parametrize("zeta", [0.5, 2.0, 3.0])
    def test_renyi_matches_quadrature(self, params, zeta):
        dist = EGLDistribution(params)
        value, _ = quad(lambda x: math.exp(zeta * dist.log_pdf(x)), 0.0, math.inf, epsabs=0, epsrel=1e-12, limit=500)
        assert dist.renyi_entropy(zeta) == pytest.approx(math.log(value) / (1.0 - zeta), abs=1e-6)

    @pytest.mark.parametrize("zeta", [1.0, 0.0, -2.0, float("inf")])
    def test_renyi_invalid_order(self, zeta):
        with pytest.raises(DomainError):
            egl(1, 1, 1).renyi_entropy(zeta)

    def test_shannon_matches_lindley(self):
        lindley = LindleyFamily(1.0)

        def integrand(x):
            log_f = float(lindley.log_pdf(x))
            return -math.exp(log_f) * log_f

        expected, _ = quad(integrand, 0.0, math.inf, epsabs=0, epsrel=1e-12, limit=500)
        assert egl(1, 1, 1).shannon_entropy() == pytest.approx(expected, abs=1e-9)

    def test_shannon_scale_rule(self):
        base = egl(1, 0.5878, 0.6457).shannon_entropy()
        assert egl(2, 0.5878, 0.6457).shannon_entropy() == pytest.approx(base - math.log(2.0), abs=1e-8)

    def test_shannon_is_renyi_limit(self):
        dist = EGLDistribution(BLADDER_EGL)
        limit = 0.5 * (dist.renyi_entropy(1.0 - 1e-3) + dist.renyi_entropy(1.0 + 1e-3))
        assert dist.shannon_entropy() == pytest.approx(limit, abs=1e-4)


class TestOrderStatistics:
    def test_single_observation(self):
        dist = EGLDistribution(BLADDER_EGL)
        x = np.array([0.0, 0.5, 3.0])
        np.testing.assert_allclose(dist.order_stat_pdf(1, 1, x), dist.pdf(x), rtol=1e-12)
        assert dist.order_stat_moment(1, 1, 1) == pytest.approx(dist.mean(), rel=1e-10)

    def test_maximum_of_two(self):
        dist = egl(1, 1, 2)
        x = np.array([0.2, 1.0, 2.5])
        np.testing.assert_allclose(dist.order_stat_pdf(2, 2, x), 2 * dist.pdf(x) * dist.cdf(x), rtol=1e-12)

    def test_direct_formula(self):
        dist = egl(1, 1, 1)
        expected = 20.0 * dist.pdf(1.0) * dist.cdf(1.0) * dist.survival(1.0) ** 3
        assert dist.order_stat_pdf(2, 5, 1.0) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize(
        "params,i,n,q",
        [
            ((1, 1, 1), 1, 2, 1),
            ((1, 1, 1), 2, 5, 2),
            (BLADDER_EGL.as_tuple(), 3, 4, 1),
            ((2, 0.5, 1.5), 4, 6, 3),
        ],
    )
    def test_series_matches_quadrature(self, params, i, n, q):
        dist = egl(*params)
        expected, _ = quad(lambda x: x ** q * dist.order_stat_pdf(i, n, x), 0.0, math.inf, epsabs=0, epsrel=1e-12, limit=500)
        assert dist.order_stat_moment(i, n, q) == pytest.approx(expected, rel=1e-5)

    def test_series_matches_monte_carlo(self):
        dist = egl(1, 1, 1)
        draws = np.sort(dist.sample(5 * 20000, seed=3).reshape(20000, 5), axis=1)[:, 1]
        se = draws.std(ddof=1) / math.sqrt(draws.size)
        assert abs(draws.mean() - dist.order_stat_moment(2, 5, 1)) < 4 * se

    @pytest.mark.parametrize("i,n", [(0, 3), (4, 3), (1, 0)])
    def test_invalid_index(self, i, n):
        with pytest.raises(DomainError):
            egl(1, 1, 1).order_stat_pdf(i, n, 1.0)

    def test_invalid_moment_order(self):
        with pytest.raises(DomainError):
            egl(1, 1, 1).order_stat_moment(1, 2, 0)


class TestExtremes:
    def test_norming_constants(self):
        dist = egl(1, 1, 2)
        norming = dist.extreme_norming(100)
        assert norming.b_n == pytest.approx(dist.quantile(0.99), rel=1e-12)
        assert norming.a_n == pytest.approx(1.0 + norming.b_n, rel=1e-12)
        assert norming.gumbel_rate == pytest.approx(2.0)
        assert norming.min_scale == pytest.approx(dist.quantile(0.01), rel=1e-12)
        assert egl_core.extreme_norming(EglParams(lam=1, theta=1, alpha=2), 100) == norming

    def test_invalid_size(self):
        with pytest.raises(DomainError):
            egl(1, 1, 2).extreme_norming(1)

    def test_sample_extremes_are_deterministic(self):
        dist = egl(1, 1, 2)
        first = dist.sample_extremes(50, 10, seed=4)
        np.testing.assert_array_equal(first, dist.sample_extremes(50, 10, seed=4))
        minima = dist.sample_extremes(50, 10, seed=4, kind=ExtremeKind.MINIMUM)
        assert np.all(minima < first)

    @pytest.mark.slow
    def test_normalized_maxima_converge(self):
        dist = egl(1, 1, 2)
        n = 10 ** 4
        norming = dist.extreme_norming(n)
        maxima = dist.sample_extremes(n, 2000, seed=2016)
        result = kstest(norming.normalize_maxima(maxima), norming.limit_cdf)
        assert result.statistic < 0.05

    @pytest.mark.slow
    def test_scaled_minima_converge(self):
        dist = egl(1, 1, 2)
        n = 10 ** 4
        minima = dist.sample_extremes(n, 2000, seed=2017, kind=ExtremeKind.MINIMUM)
        result = kstest(minima / dist.minimum_norming(n), "expon")
        assert result.statistic < 0.05


def test_functional_api_matches_class():
    p = EglParams(lam=1.3, theta=0.7, alpha=0.9)
    dist = EGLDistribution(p)
    x = np.array([0.0, 0.4, 2.0])
    np.testing.assert_array_equal(egl_core.pdf(p, x), dist.pdf(x))
    np.testing.assert_array_equal(egl_core.cdf(p, x), dist.cdf(x))
    np.testing.assert_array_equal(egl_core.survival(p, x), dist.survival(x))
    np.testing.assert_array_equal(egl_core.hazard(p, x), dist.hazard(x))
    assert egl_core.quantile(p, 0.3) == dist.quantile(0.3)
    assert egl_core.median(p) == dist.median()
    assert egl_core.raw_moment(p, 2) == dist.raw_moment(2)
    assert egl_core.conditional_moment(p, 1, 0.5) == dist.conditional_moment(1, 0.5)
    assert egl_core.renyi_entropy(p, 2.0) == dist.renyi_entropy(2.0)
    assert egl_core.order_stat_pdf(p, 1, 3, 0.5) == dist.order_stat_pdf(1, 3, 0.5)
    np.testing.assert_array_equal(egl_core.sample(p, 10, 1), dist.sample(10, 1))
