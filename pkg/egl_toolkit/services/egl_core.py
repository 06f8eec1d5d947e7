"""
Extended Generalized Lindley distribution service.

EGL(lambda, theta, alpha) has survival function

    S(x) = exp(theta (1 - p)) (1 + theta p) / (1 + theta),   p = (1 + lambda x)^alpha,

and Y = p - 1 follows Lindley(theta). Every closed form below is evaluated in
log space; moment series are summed with signed log-sum-exp and fall back to
quadrature when their terms cancel too heavily.
"""

import logging
import math
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from egl_toolkit.core.exceptions import DomainError
from egl_toolkit.models.distribution import (
    DensityMode,
    EglParams,
    ExtremeKind,
    ExtremeNorming,
    HazardShape,
    SamplingMethod,
)
from egl_toolkit.services.specfun import (
    integrate,
    lambert_w_neg1_log,
    log_exp_integral,
    log_upper_inc_gamma,
)

logger = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

# log of the smallest positive normal double
LOG_SURVIVAL_FLOOR = -745.0
# ratio of sum of |terms| to |sum| above which a series is replaced by quadrature
MAX_CANCELLATION = 1e8
# survival levels used to split quadrature ranges
TAIL_LEVELS = (0.9, 0.5, 0.1, 1e-2, 1e-4, 1e-7, 1e-10)


def as_support(x: ArrayLike, name: str = "x") -> Tuple[np.ndarray, bool]:
    values = np.asarray(x, dtype=float)
    if np.any(np.isnan(values)) or np.any(values < 0):
        raise DomainError(f"{name} must be a nonnegative number, got {x!r}")
    return values, values.ndim == 0


def unwrap(values: np.ndarray, scalar: bool):
    return float(values) if scalar else values


def _log_comb(n: int, k: np.ndarray) -> np.ndarray:
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def _signed_log_sum(log_terms: np.ndarray, signs: np.ndarray) -> Tuple[float, float, float]:
    """Return (log|sum|, sign, cancellation ratio) of sum(signs * exp(log_terms))."""
    log_abs_total = float(logsumexp(log_terms))
    log_sum, sign = logsumexp(log_terms, b=signs, return_sign=True)
    log_sum = float(log_sum)
    if sign == 0 or not math.isfinite(log_sum):
        return -math.inf, 0.0, math.inf
    return log_sum, float(sign), math.exp(log_abs_total - log_sum)


class EGLDistribution:
    """Immutable EGL(lambda, theta, alpha) distribution."""

    def __init__(self, params: EglParams):
        self.params = params
        self.lam = params.lam
        self.theta = params.theta
        self.alpha = params.alpha
        self._log_norm = (
            math.log(self.alpha) + 2.0 * math.log(self.theta)
            + math.log(self.lam) - math.log1p(self.theta)
        )

    @classmethod
    def from_values(cls, lam: float, theta: float, alpha: float) -> "EGLDistribution":
        return cls(EglParams(lam=lam, theta=theta, alpha=alpha))

    def __repr__(self) -> str:
        return f"EGLDistribution(lam={self.lam!r}, theta={self.theta!r}, alpha={self.alpha!r})"

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _log_q(self, x: np.ndarray) -> np.ndarray:
        return np.log1p(self.lam * x)

    def log_pdf(self, x: ArrayLike):
        values, scalar = as_support(x)
        log_q = self._log_q(values)
        out = (
            self._log_norm
            + (2.0 * self.alpha - 1.0) * log_q
            - self.theta * np.expm1(self.alpha * log_q)
        )
        return unwrap(out, scalar)

    def pdf(self, x: ArrayLike):
        """g(x) = alpha theta^2 lambda (1 + lambda x)^(2 alpha - 1) exp(theta - theta p) / (1 + theta)."""
        return unwrap(np.exp(np.asarray(self.log_pdf(x))), np.ndim(x) == 0)

    def log_survival(self, x: ArrayLike):
        values, scalar = as_support(x)
        p_minus_1 = np.expm1(self.alpha * self._log_q(values))
        # log S = -theta (p - 1) + log(1 + theta (p - 1) / (1 + theta)), exactly 0 at x = 0
        out = -self.theta * p_minus_1 + np.log1p(self.theta * p_minus_1 / (1.0 + self.theta))
        return unwrap(np.minimum(out, 0.0), scalar)

    def survival(self, x: ArrayLike):
        return unwrap(np.exp(np.asarray(self.log_survival(x))), np.ndim(x) == 0)

    def cdf(self, x: ArrayLike):
        return unwrap(-np.expm1(np.asarray(self.log_survival(x))), np.ndim(x) == 0)

    def cumulative_hazard(self, x: ArrayLike):
        return unwrap(-np.asarray(self.log_survival(x)), np.ndim(x) == 0)

    def hazard(self, x: ArrayLike):
        """h(x) = alpha theta^2 lambda (1 + lambda x)^(2 alpha - 1) / (1 + theta (1 + lambda x)^alpha)."""
        values, scalar = as_support(x)
        log_q = self._log_q(values)
        log_h = (
            math.log(self.alpha) + 2.0 * math.log(self.theta) + math.log(self.lam)
            + (2.0 * self.alpha - 1.0) * log_q
            - np.log1p(self.theta * np.exp(self.alpha * log_q))
        )
        return unwrap(np.exp(log_h), scalar)

    # ------------------------------------------------------------------
    # Shape
    # ------------------------------------------------------------------

    def classify_hazard_shape(self) -> HazardShape:
        """
        Sign analysis of d log h / dq, which has the sign of
        (2 alpha - 1) + theta (alpha - 1) q^alpha on q >= 1.
        """
        alpha, theta = self.alpha, self.theta
        if alpha >= 1.0:
            return HazardShape.INCREASING
        if alpha <= 0.5:
            return HazardShape.DECREASING
        if theta < (2.0 * alpha - 1.0) / (1.0 - alpha):
            return HazardShape.UPSIDE_DOWN
        return HazardShape.DECREASING

    def hazard_peak(self) -> Optional[float]:
        """Location of the hazard maximum for upside-down hazards, else None."""
        if self.classify_hazard_shape() is not HazardShape.UPSIDE_DOWN:
            return None
        u = (2.0 * self.alpha - 1.0) / (self.theta * (1.0 - self.alpha))
        return math.expm1(math.log(u) / self.alpha) / self.lam

    def mode(self) -> DensityMode:
        alpha, theta = self.alpha, self.theta
        if theta < 2.0 and alpha * (2.0 - theta) > 1.0:
            ratio = (2.0 * alpha - 1.0) / (alpha * theta)
            location = math.expm1(math.log(ratio) / alpha) / self.lam
            if location > 0.0:
                return DensityMode(location=location, at_boundary=False)
        return DensityMode(location=0.0, at_boundary=True)

    # ------------------------------------------------------------------
    # Quantiles
    # ------------------------------------------------------------------

    def isf(self, s: ArrayLike):
        """
        Inverse survival function via the negative Lambert W branch.

        w = W_{-1}(-s (1 + theta) e^(-theta - 1)) gives p = -(1 + w) / theta.
        The argument is carried as its logarithm, valid for any theta.
        """
        levels = np.asarray(s, dtype=float)
        scalar = levels.ndim == 0
        levels = np.atleast_1d(levels)
        if np.any(np.isnan(levels)) or np.any(levels <= 0.0) or np.any(levels > 1.0):
            raise DomainError(f"survival level must lie in (0, 1], got {s!r}")

        out = np.zeros_like(levels)
        interior = levels < 1.0
        if np.any(interior):
            theta = self.theta
            log_arg = np.log(levels[interior]) + math.log1p(theta) - theta - 1.0
            w = lambert_w_neg1_log(np.minimum(log_arg, -1.0))
            p_minus_1 = np.maximum(-(w + 1.0 + theta) / theta, 0.0)
            out[interior] = np.expm1(np.log1p(p_minus_1) / self.alpha) / self.lam
        return unwrap(out[0] if scalar else out, scalar)

    def quantile(self, gamma: ArrayLike):
        levels = np.asarray(gamma, dtype=float)
        if np.any(np.isnan(levels)) or np.any(levels < 0.0) or np.any(levels >= 1.0):
            raise DomainError(f"quantile level must lie in [0, 1), got {gamma!r}")
        return self.isf(1.0 - levels)

    def median(self) -> float:
        return self.quantile(0.5)

    # ------------------------------------------------------------------
    # Sampling
    # ------------------------------------------------------------------

    def sample(
        self,
        n: int,
        seed: int,
        method: SamplingMethod = SamplingMethod.INVERSE_TRANSFORM,
    ) -> np.ndarray:
        """Draw n variates, deterministic given (seed, method)."""
        if n < 1:
            raise DomainError(f"sample size must be at least 1, got {n}")
        rng = np.random.default_rng(seed)
        method = SamplingMethod(method)
        if method is SamplingMethod.INVERSE_TRANSFORM:
            return np.atleast_1d(self.quantile(rng.random(n)))

        theta = self.theta
        from_exponential = rng.random(n) < theta / (1.0 + theta)
        exponential = rng.exponential(scale=1.0 / theta, size=n)
        gamma = rng.gamma(shape=2.0, scale=1.0 / theta, size=n)
        lindley = np.where(from_exponential, exponential, gamma)
        return np.expm1(np.log1p(lindley) / self.alpha) / self.lam

    # ------------------------------------------------------------------
    # Moments
    # ------------------------------------------------------------------

    def _tail_breakpoints(self) -> list:
        return [float(v) for v in np.atleast_1d(self.isf(np.asarray(TAIL_LEVELS)))]

    def expect(self, func: Callable[[float], float], lower: float = 0.0) -> float:
        """Quadrature of func(x) g(x) over (lower, inf)."""
        def integrand(x: float) -> float:
            return func(x) * math.exp(self.log_pdf(x))

        return integrate(integrand, lower, math.inf, breakpoints=self._tail_breakpoints())

    def _moment_series(self, k: int, z: float) -> Tuple[float, float, float]:
        """
        Series for E[(X^k) 1{X > t}] / S(t) with z = theta (1 + lambda t)^alpha,
        returned as (log|sum|, sign, cancellation) without the prefactor.
        """
        i = np.arange(k + 1)
        s = i / self.alpha + 2.0
        log_gamma = np.array([log_upper_inc_gamma(float(si), z) for si in s])
        log_terms = _log_comb(k, i) - s * math.log(self.theta) + log_gamma
        signs = np.where((k - i) % 2 == 0, 1.0, -1.0)
        return _signed_log_sum(log_terms, signs)

    def raw_moment(self, k: int) -> float:
        """E(X^k) from the incomplete gamma series."""
        if k < 1:
            raise DomainError(f"moment order must be a positive integer, got {k}")
        log_sum, sign, cancellation = self._moment_series(k, self.theta)
        if cancellation > MAX_CANCELLATION:
            logger.warning(
                f"raw moment series for k={k} at {self!r} cancels by {cancellation:.1e}; using quadrature"
            )
            return self.expect(lambda x: x ** k)
        log_prefactor = (
            self.theta + 2.0 * math.log(self.theta) - math.log1p(self.theta)
            - k * math.log(self.lam)
        )
        return sign * math.exp(log_prefactor + log_sum)

    def conditional_moment(self, k: int, t: float) -> float:
        """E(X^k | X > t)."""
        if k < 1:
            raise DomainError(f"moment order must be a positive integer, got {k}")
        log_sf = self.log_survival(t)
        if log_sf < LOG_SURVIVAL_FLOOR:
            raise DomainError(f"survival at t={t} underflows; conditional moment undefined")

        z = self.theta * math.exp(self.alpha * math.log1p(self.lam * t))
        log_sum, sign, cancellation = self._moment_series(k, z)
        if cancellation > MAX_CANCELLATION:
            logger.warning(
                f"conditional moment series for k={k}, t={t} cancels by {cancellation:.1e}; using quadrature"
            )
            return self.expect(lambda x: x ** k, lower=t) / math.exp(log_sf)
        log_prefactor = (
            z - math.log1p(z) + 2.0 * math.log(self.theta) - k * math.log(self.lam)
        )
        return sign * math.exp(log_prefactor + log_sum)

    def mean_residual_life(self, t: float) -> float:
        return max(self.conditional_moment(1, t) - t, 0.0)

    def mean(self) -> float:
        return self.raw_moment(1)

    def variance(self) -> float:
        m1 = self.raw_moment(1)
        return self.raw_moment(2) - m1 * m1

    def skewness(self) -> float:
        m1, m2, m3 = (self.raw_moment(k) for k in (1, 2, 3))
        var = m2 - m1 * m1
        return (m3 - 3.0 * m1 * m2 + 2.0 * m1 ** 3) / var ** 1.5

    def kurtosis(self) -> float:
        """Non-excess kurtosis E(X - mu)^4 / sigma^4."""
        m1, m2, m3, m4 = (self.raw_moment(k) for k in (1, 2, 3, 4))
        var = m2 - m1 * m1
        central4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 ** 4
        return central4 / (var * var)

    # ------------------------------------------------------------------
    # Entropy
    # ------------------------------------------------------------------

    def renyi_entropy(self, zeta: float) -> float:
        """(1/(1 - zeta)) log of the integral of g^zeta, through E_nu(zeta theta)."""
        if not (math.isfinite(zeta) and zeta > 0.0) or zeta == 1.0:
            raise DomainError(f"Renyi order must be positive and different from 1, got {zeta!r}")
        alpha, theta, lam = self.alpha, self.theta, self.lam
        nu = (-2.0 * zeta * alpha + alpha + zeta - 1.0) / alpha
        log_integral = (
            (zeta - 1.0) * math.log(alpha * lam)
            + 2.0 * zeta * math.log(theta)
            + theta * zeta
            - zeta * math.log1p(theta)
            + log_exp_integral(nu, zeta * theta)
        )
        return log_integral / (1.0 - zeta)

    def shannon_entropy(self) -> float:
        def integrand(x: float) -> float:
            log_g = self.log_pdf(x)
            if log_g == -math.inf:
                return 0.0
            return -math.exp(log_g) * log_g

        return integrate(integrand, 0.0, math.inf, breakpoints=self._tail_breakpoints())

    # ------------------------------------------------------------------
    # Order statistics
    # ------------------------------------------------------------------

    @staticmethod
    def _check_order_index(i: int, n: int) -> None:
        if not (1 <= i <= n):
            raise DomainError(f"order statistic index must satisfy 1 <= i <= n, got i={i}, n={n}")

    def order_stat_pdf(self, i: int, n: int, x: ArrayLike):
        self._check_order_index(i, n)
        values, scalar = as_support(x)
        log_coef = gammaln(n + 1) - gammaln(i) - gammaln(n - i + 1)
        log_sf = np.asarray(self.log_survival(values))
        with np.errstate(divide="ignore"):
            cdf = -np.expm1(log_sf)
            log_f = (
                log_coef
                + np.asarray(self.log_pdf(values))
                + xlogy(i - 1, cdf)
                + (n - i) * log_sf
            )
        return unwrap(np.exp(log_f), scalar)

    def order_stat_moment(self, i: int, n: int, q: int) -> float:
        """
        E(X_{i:n}^q) by expanding G^(i-1) = (1 - S)^(i-1) and (1 + theta p)^(m-1)
        into an incomplete gamma triple sum, m = n - i + j + 1.
        """
        self._check_order_index(i, n)
        if q < 1:
            raise DomainError(f"moment order must be a positive integer, got {q}")
        theta, alpha = self.theta, self.alpha
        log_theta = math.log(theta)

        log_terms = []
        signs = []
        for j in range(i):
            m = n - i + j + 1
            z = theta * m
            log_outer = (
                float(_log_comb(i - 1, np.asarray(j)))
                - m * math.log1p(theta) + z
            )
            for k in range(m):
                log_middle = log_outer + float(_log_comb(m - 1, np.asarray(k))) + k * log_theta
                for l in range(q + 1):
                    s = k + 2.0 + l / alpha
                    log_terms.append(
                        log_middle
                        + float(_log_comb(q, np.asarray(l)))
                        - s * math.log(z)
                        + log_upper_inc_gamma(s, z)
                    )
                    signs.append(-1.0 if (j + q - l) % 2 else 1.0)

        log_sum, sign, cancellation = _signed_log_sum(np.asarray(log_terms), np.asarray(signs))
        if cancellation > MAX_CANCELLATION:
            logger.warning(
                f"order statistic series for i={i}, n={n}, q={q} cancels by {cancellation:.1e}; using quadrature"
            )
            return integrate(
                lambda x: x ** q * self.order_stat_pdf(i, n, x),
                0.0, math.inf, breakpoints=self._tail_breakpoints(),
            )
        log_coef = gammaln(n + 1) - gammaln(i) - gammaln(n - i + 1)
        log_prefactor = float(log_coef) + 2.0 * log_theta - q * math.log(self.lam)
        return sign * math.exp(log_prefactor + log_sum)

    # ------------------------------------------------------------------
    # Extremes
    # ------------------------------------------------------------------

    def extreme_norming(self, n: int) -> ExtremeNorming:
        """
        b_n = quantile(1 - 1/n), a_n = lambda (1 + lambda b_n)^(alpha - 1).

        a_n (X_{n:n} - b_n) tends to a Gumbel law with rate alpha * theta and
        X_{1:n} / quantile(1/n) to a unit exponential.
        """
        if n < 2:
            raise DomainError(f"sample size must be at least 2, got {n}")
        b_n = self.isf(1.0 / n)
        a_n = self.lam * math.exp((self.alpha - 1.0) * math.log1p(self.lam * b_n))
        return ExtremeNorming(
            n=n,
            a_n=a_n,
            b_n=b_n,
            gumbel_rate=self.alpha * self.theta,
            min_scale=self.minimum_norming(n),
        )

    def minimum_norming(self, n: int) -> float:
        if n < 1:
            raise DomainError(f"sample size must be at least 1, got {n}")
        return self.quantile(1.0 / n) if n > 1 else self.median()

    def sample_extremes(
        self,
        n: int,
        replicates: int,
        seed: int,
        kind: ExtremeKind = ExtremeKind.MAXIMUM,
    ) -> np.ndarray:
        """Exact draws of X_{n:n} (or X_{1:n}) from n-th roots of uniforms."""
        if n < 1 or replicates < 1:
            raise DomainError(f"n and replicates must be positive, got n={n}, replicates={replicates}")
        rng = np.random.default_rng(seed)
        u = 1.0 - rng.random(replicates)
        if ExtremeKind(kind) is ExtremeKind.MAXIMUM:
            # F(M) = U^(1/n)  <=>  S(M) = 1 - U^(1/n)
            levels = -np.expm1(np.log(u) / n)
            levels = np.clip(levels, np.finfo(float).tiny, 1.0)
        else:
            levels = np.exp(np.log(u) / n)
        return np.atleast_1d(self.isf(levels))


# ----------------------------------------------------------------------
# Functional API on EglParams
# ----------------------------------------------------------------------

def pdf(p: EglParams, x: ArrayLike):
    return EGLDistribution(p).pdf(x)


def cdf(p: EglParams, x: ArrayLike):
    return EGLDistribution(p).cdf(x)


def survival(p: EglParams, x: ArrayLike):
    return EGLDistribution(p).survival(x)


def hazard(p: EglParams, x: ArrayLike):
    return EGLDistribution(p).hazard(x)


def classify_hazard_shape(p: EglParams) -> HazardShape:
    return EGLDistribution(p).classify_hazard_shape()


def mode(p: EglParams) -> DensityMode:
    return EGLDistribution(p).mode()


def quantile(p: EglParams, gamma: ArrayLike):
    return EGLDistribution(p).quantile(gamma)


def median(p: EglParams) -> float:
    return EGLDistribution(p).median()


def sample(p: EglParams, n: int, seed: int, method: SamplingMethod = SamplingMethod.INVERSE_TRANSFORM) -> np.ndarray:
    return EGLDistribution(p).sample(n, seed, method)


def raw_moment(p: EglParams, k: int) -> float:
    return EGLDistribution(p).raw_moment(k)


def conditional_moment(p: EglParams, k: int, t: float) -> float:
    return EGLDistribution(p).conditional_moment(k, t)


def mean_residual_life(p: EglParams, t: float) -> float:
    return EGLDistribution(p).mean_residual_life(t)


def renyi_entropy(p: EglParams, zeta: float) -> float:
    return EGLDistribution(p).renyi_entropy(zeta)


def shannon_entropy(p: EglParams) -> float:
    return EGLDistribution(p).shannon_entropy()


def order_stat_pdf(p: EglParams, i: int, n: int, x: ArrayLike):
    return EGLDistribution(p).order_stat_pdf(i, n, x)


def order_stat_moment(p: EglParams, i: int, n: int, q: int) -> float:
    return EGLDistribution(p).order_stat_moment(i, n, q)


def extreme_norming(p: EglParams, n: int) -> ExtremeNorming:
    return EGLDistribution(p).extreme_norming(n)
