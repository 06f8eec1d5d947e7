"""
Distribution models: EGL parameters, shape classifications and family specs.
"""

import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationInfo, field_validator, model_validator


class HazardShape(str, Enum):
    """Shape of the EGL hazard rate."""
    DECREASING = "Decreasing"
    UPSIDE_DOWN = "UpsideDown"
    INCREASING = "Increasing"


class SamplingMethod(str, Enum):
    """Random variate generators for the EGL distribution."""
    INVERSE_TRANSFORM = "inverse"
    LINDLEY_TRANSFORM = "transform"


class ExtremeKind(str, Enum):
    MAXIMUM = "max"
    MINIMUM = "min"


class Family(str, Enum):
    """Lifetime families available for fitting and comparison."""
    EGL = "egl"
    LINDLEY_EXPONENTIAL = "lindley-exponential"
    POWER_LINDLEY = "power-lindley"
    NGLD = "ngld"
    LINDLEY = "lindley"
    EXPONENTIAL = "exponential"

    @classmethod
    def parse(cls, tag: str) -> "Family":
        """Resolve a family tag, accepting the short names used in comparison tables."""
        key = tag.strip().lower()
        if key in FAMILY_ALIASES:
            return FAMILY_ALIASES[key]
        return cls(key)


FAMILY_ALIASES = {
    "le": Family.LINDLEY_EXPONENTIAL,
    "l-e": Family.LINDLEY_EXPONENTIAL,
    "pl": Family.POWER_LINDLEY,
    "l": Family.LINDLEY,
    "e": Family.EXPONENTIAL,
    "exp": Family.EXPONENTIAL,
}

# Parameter names in ModelSpec order
FAMILY_PARAMETERS = {
    Family.EGL: ("lam", "theta", "alpha"),
    Family.LINDLEY_EXPONENTIAL: ("theta", "lam"),
    Family.POWER_LINDLEY: ("alpha", "beta"),
    Family.NGLD: ("theta", "alpha", "beta"),
    Family.LINDLEY: ("theta",),
    Family.EXPONENTIAL: ("theta",),
}


def _check_positive_finite(name: str, v: float) -> float:
    if not (math.isfinite(v) and v > 0):
        raise ValueError(f"{name} must be strictly positive and finite, got {v}")
    return v


class EglParams(BaseModel):
    """Parameter triple (lambda, theta, alpha) of EGL(lambda, theta, alpha)."""
    lam: float
    theta: float
    alpha: float

    model_config = ConfigDict(frozen=True)

    @field_validator("lam", "theta", "alpha")
    @classmethod
    def validate_positive(cls, v: float, info: ValidationInfo) -> float:
        return _check_positive_finite(info.field_name, v)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.lam, self.theta, self.alpha)

    @classmethod
    def from_sequence(cls, values) -> "EglParams":
        lam, theta, alpha = (float(v) for v in values)
        return cls(lam=lam, theta=theta, alpha=alpha)


class DensityMode(BaseModel):
    """Mode of the density: interior point, or the boundary x = 0."""
    location: float
    at_boundary: bool

    model_config = ConfigDict(frozen=True)


class ExtremeNorming(BaseModel):
    """Norming constants for the sample maximum (and minimum) of size n."""
    n: int
    a_n: float
    b_n: float
    gumbel_rate: float
    min_scale: float

    model_config = ConfigDict(frozen=True)

    @field_validator("n")
    @classmethod
    def validate_n(cls, v: int) -> int:
        if v < 2:
            raise ValueError("Sample size must be at least 2")
        return v

    @field_validator("a_n", "gumbel_rate")
    @classmethod
    def validate_scale(cls, v: float, info: ValidationInfo) -> float:
        return _check_positive_finite(info.field_name, v)

    def normalize_maxima(self, maxima):
        """Map sample maxima to a_n (X_{n:n} - b_n)."""
        return self.a_n * (maxima - self.b_n)

    def limit_cdf(self, x):
        """Limit law of a_n (X_{n:n} - b_n): Gumbel with rate alpha * theta."""
        return np.exp(-np.exp(-self.gumbel_rate * np.asarray(x, dtype=float)))


class ModelSpec(BaseModel):
    """One fitted family together with its parameter vector."""
    family: Family
    params: Tuple[float, ...]

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_arity(self) -> "ModelSpec":
        names = FAMILY_PARAMETERS[self.family]
        if len(self.params) != len(names):
            raise ValueError(
                f"{self.family.value} takes {len(names)} parameters {names}, got {len(self.params)}"
            )
        for name, value in zip(names, self.params):
            _check_positive_finite(name, value)
        return self

    @property
    def param_names(self) -> Tuple[str, ...]:
        return FAMILY_PARAMETERS[self.family]

    @property
    def n_params(self) -> int:
        return len(self.params)

    def named_params(self) -> dict:
        return dict(zip(self.param_names, self.params))

    def egl_params(self) -> Optional[EglParams]:
        if self.family is not Family.EGL:
            return None
        return EglParams.from_sequence(self.params)
