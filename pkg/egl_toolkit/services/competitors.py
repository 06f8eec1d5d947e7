"""
Lifetime families compared against EGL.

Each family is built from a raw parameter vector in ``ModelSpec`` order and
exposes densities, distribution functions, log-likelihood and a seeded
sampler. Lindley-type families are sampled through their Lindley mixture.
"""

import logging
import math
from abc import ABC, abstractmethod
from typing import ClassVar, Dict, Sequence, Type, Union

import numpy as np
from scipy.special import gammainc, gammaln, xlogy

from egl_toolkit.core.exceptions import DomainError
from egl_toolkit.models.distribution import EglParams, Family, ModelSpec
from egl_toolkit.services.egl_core import ArrayLike, EGLDistribution, as_support, unwrap

logger = logging.getLogger(__name__)

SeedLike = Union[int, np.random.Generator, None]


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _lindley_variates(theta: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Lindley(theta) as the mixture theta/(1+theta) Exp(theta) + 1/(1+theta) Gamma(2, theta)."""
    from_exponential = rng.random(n) < theta / (1.0 + theta)
    exponential = rng.exponential(scale=1.0 / theta, size=n)
    gamma = rng.gamma(shape=2.0, scale=1.0 / theta, size=n)
    return np.where(from_exponential, exponential, gamma)


def _lindley_log_survival(theta: float, t: np.ndarray) -> np.ndarray:
    return -theta * t + np.log1p(theta * t / (1.0 + theta))


class LifetimeFamily(ABC):
    """Base class for a parametric lifetime family with positive parameters."""

    family: ClassVar[Family]

    def __init__(self, *params: float):
        self.spec = ModelSpec(family=self.family, params=tuple(float(v) for v in params))
        self.params = self.spec.params

    def __repr__(self) -> str:
        named = ", ".join(f"{k}={v!r}" for k, v in self.spec.named_params().items())
        return f"{type(self).__name__}({named})"

    @abstractmethod
    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _cdf(self, x: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        ...

    def log_pdf(self, x: ArrayLike):
        values, scalar = as_support(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return unwrap(self._log_pdf(values), scalar)

    def pdf(self, x: ArrayLike):
        values, scalar = as_support(x)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return unwrap(np.exp(self._log_pdf(values)), scalar)

    def cdf(self, x: ArrayLike):
        values, scalar = as_support(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return unwrap(np.clip(self._cdf(values), 0.0, 1.0), scalar)

    def survival(self, x: ArrayLike):
        values, scalar = as_support(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return unwrap(np.clip(1.0 - self._cdf(values), 0.0, 1.0), scalar)

    def loglik(self, data: ArrayLike) -> float:
        values, _ = as_support(data, name="data")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            total = float(np.sum(self._log_pdf(np.atleast_1d(values))))
        return total if not math.isnan(total) else -math.inf

    def sample(self, n: int, seed: SeedLike = None) -> np.ndarray:
        if n < 1:
            raise DomainError(f"sample size must be at least 1, got {n}")
        return self._draw(n, _rng(seed))

    def to_spec(self) -> ModelSpec:
        return self.spec


class EGLFamily(LifetimeFamily):
    """EGL(lambda, theta, alpha) through the distribution service."""

    family = Family.EGL

    def __init__(self, lam: float, theta: float, alpha: float):
        super().__init__(lam, theta, alpha)
        self.distribution = EGLDistribution(EglParams.from_sequence(self.params))

    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.distribution.log_pdf(x))

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.distribution.cdf(x))

    def survival(self, x: ArrayLike):
        return self.distribution.survival(x)

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        return np.atleast_1d(self.distribution.quantile(rng.random(n)))


class LindleyExponentialFamily(LifetimeFamily):
    """
    Lindley-exponential L-E(theta, lambda).

    With v = 1 - exp(-lambda x), T = -log v follows Lindley(theta), so
    F(x) = v^theta (1 + theta - theta log v) / (1 + theta).
    """

    family = Family.LINDLEY_EXPONENTIAL

    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        theta, lam = self.params
        log_v = np.log(-np.expm1(-lam * x))
        return (
            2.0 * math.log(theta) + math.log(lam) - math.log1p(theta)
            - lam * x + np.log1p(-log_v) + (theta - 1.0) * log_v
        )

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        theta, lam = self.params
        log_v = np.log(-np.expm1(-lam * x))
        return np.where(
            x > 0,
            np.exp(_lindley_log_survival(theta, -log_v)),
            0.0,
        )

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        theta, lam = self.params
        t = _lindley_variates(theta, n, rng)
        return -np.log(-np.expm1(-t)) / lam


class PowerLindleyFamily(LifetimeFamily):
    """Power Lindley PL(alpha, beta): X = T^(1/alpha) with T ~ Lindley(beta)."""

    family = Family.POWER_LINDLEY

    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        alpha, beta = self.params
        x_alpha = x ** alpha
        return (
            math.log(alpha) + 2.0 * math.log(beta) - math.log1p(beta)
            + np.log1p(x_alpha) + xlogy(alpha - 1.0, x) - beta * x_alpha
        )

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        alpha, beta = self.params
        return -np.expm1(_lindley_log_survival(beta, x ** alpha))

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        alpha, beta = self.params
        return _lindley_variates(beta, n, rng) ** (1.0 / alpha)


class NGLDFamily(LifetimeFamily):
    """
    New generalized Lindley NGLD(theta, alpha, beta): the mixture
    theta/(1+theta) Gamma(alpha, rate theta) + 1/(1+theta) Gamma(beta, rate theta).
    """

    family = Family.NGLD

    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        theta, alpha, beta = self.params
        log_theta = math.log(theta)
        first = (alpha + 1.0) * log_theta + xlogy(alpha - 1.0, x) - gammaln(alpha)
        second = beta * log_theta + xlogy(beta - 1.0, x) - gammaln(beta)
        return -theta * x - math.log1p(theta) + np.logaddexp(first, second)

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        theta, alpha, beta = self.params
        weight = theta / (1.0 + theta)
        return weight * gammainc(alpha, theta * x) + (1.0 - weight) * gammainc(beta, theta * x)

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        theta, alpha, beta = self.params
        first = rng.random(n) < theta / (1.0 + theta)
        return np.where(
            first,
            rng.gamma(shape=alpha, scale=1.0 / theta, size=n),
            rng.gamma(shape=beta, scale=1.0 / theta, size=n),
        )


class LindleyFamily(LifetimeFamily):
    """Lindley(theta): theta^2 / (theta + 1) (1 + x) exp(-theta x)."""

    family = Family.LINDLEY

    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        (theta,) = self.params
        return 2.0 * math.log(theta) - math.log1p(theta) + np.log1p(x) - theta * x

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        (theta,) = self.params
        return -np.expm1(_lindley_log_survival(theta, x))

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        (theta,) = self.params
        return _lindley_variates(theta, n, rng)


class ExponentialFamily(LifetimeFamily):
    """Exponential with rate theta."""

    family = Family.EXPONENTIAL

    def _log_pdf(self, x: np.ndarray) -> np.ndarray:
        (theta,) = self.params
        return math.log(theta) - theta * x

    def _cdf(self, x: np.ndarray) -> np.ndarray:
        (theta,) = self.params
        return -np.expm1(-theta * x)

    def _draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        (theta,) = self.params
        return rng.exponential(scale=1.0 / theta, size=n)


FAMILY_REGISTRY: Dict[Family, Type[LifetimeFamily]] = {
    Family.EGL: EGLFamily,
    Family.LINDLEY_EXPONENTIAL: LindleyExponentialFamily,
    Family.POWER_LINDLEY: PowerLindleyFamily,
    Family.NGLD: NGLDFamily,
    Family.LINDLEY: LindleyFamily,
    Family.EXPONENTIAL: ExponentialFamily,
}


def build_family(model: ModelSpec) -> LifetimeFamily:
    return FAMILY_REGISTRY[model.family](*model.params)


def build_from_values(family: Family, params: Sequence[float]) -> LifetimeFamily:
    return FAMILY_REGISTRY[Family(family)](*params)


def family_pdf(model: ModelSpec, x: ArrayLike):
    return build_family(model).pdf(x)


def family_cdf(model: ModelSpec, x: ArrayLike):
    return build_family(model).cdf(x)


def family_loglik(model: ModelSpec, data: ArrayLike) -> float:
    return build_family(model).loglik(data)


def family_sample(model: ModelSpec, n: int, seed: SeedLike = None) -> np.ndarray:
    return build_family(model).sample(n, seed)

