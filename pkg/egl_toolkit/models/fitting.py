"""
Estimation and goodness-of-fit models.
"""

from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from egl_toolkit.core.config import settings
from egl_toolkit.models.distribution import Family, ModelSpec


class InformationMode(str, Enum):
    """Source of the information matrix used for the covariance estimate."""
    OBSERVED = "observed"
    EXPECTED = "expected"


class FitOptions(BaseModel):
    """Multi-start Nelder-Mead configuration."""
    seed: int = Field(default_factory=lambda: settings.default_seed)
    max_iter: int = Field(default_factory=lambda: settings.simplex_max_iter)
    max_starts: int = Field(default_factory=lambda: settings.max_starts)
    best_grid_starts: int = Field(default_factory=lambda: settings.best_grid_starts)
    grid_points: int = Field(default_factory=lambda: settings.grid_points)
    grid_low: float = Field(default_factory=lambda: settings.grid_low)
    grid_high: float = Field(default_factory=lambda: settings.grid_high)
    xatol: float = 1e-10
    fatol: float = 1e-12
    start_jitter: float = 1e-3
    polish_restarts: int = 3
    param_floor: float = Field(default_factory=lambda: settings.param_floor)
    param_ceiling: float = Field(default_factory=lambda: settings.param_ceiling)
    score_tol_per_obs: float = Field(default_factory=lambda: settings.score_tol_per_obs)
    information: InformationMode = InformationMode.OBSERVED
    level: float = Field(default_factory=lambda: settings.confidence_level)

    model_config = ConfigDict(frozen=True)

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("Confidence level must be between 0 and 1")
        return v

    @field_validator("max_iter", "max_starts", "best_grid_starts", "grid_points")
    @classmethod
    def validate_counts(cls, v: int) -> int:
        if v < 1:
            raise ValueError("Count must be at least 1")
        return v


class LimitModel(str, Enum):
    """Two-parameter laws the EGL likelihood tends to on the edge of its parameter space."""
    # lambda -> inf, theta -> 0 with c = theta lambda^alpha: X^alpha ~ Gamma(2, c)
    POWER_GAMMA = "power-gamma"
    # theta -> inf, alpha -> 0 with c = alpha theta: g = c lambda (1 + lambda x)^(-1 - c)
    LOMAX = "lomax"
    # lambda -> 0, alpha -> inf with b = lambda alpha: p -> exp(b x)
    GOMPERTZ = "gompertz"


LIMIT_PARAMETERS: Dict[LimitModel, Tuple[str, str]] = {
    LimitModel.POWER_GAMMA: ("alpha", "c"),
    LimitModel.LOMAX: ("lambda", "c"),
    LimitModel.GOMPERTZ: ("b", "theta"),
}


class BoundaryLimit(BaseModel):
    """Profile maximum of the EGL likelihood along one boundary limit."""
    model: LimitModel
    params: Tuple[float, float]
    neg_loglik: float

    model_config = ConfigDict(frozen=True)

    def named_params(self) -> Dict[str, float]:
        return dict(zip(LIMIT_PARAMETERS[self.model], self.params))


class ConfidenceInterval(BaseModel):
    """Asymptotic (Wald) interval for one parameter."""
    name: str
    estimate: float
    lower: float
    upper: float
    level: float

    model_config = ConfigDict(frozen=True)


class FitResult(BaseModel):
    """Maximum-likelihood fit of one family to one dataset."""
    model: ModelSpec
    neg_loglik: float
    score: Tuple[float, ...]
    score_norm: float
    covariance: Optional[List[List[float]]] = None
    conf_intervals: Optional[List[ConfidenceInterval]] = None
    information: InformationMode = InformationMode.OBSERVED
    level: float
    converged: bool
    n_restarts_used: int
    iterations: int
    n: int
    seed: int
    message: str = ""
    boundary: Optional[BoundaryLimit] = None

    model_config = ConfigDict(frozen=True)

    @property
    def family(self) -> Family:
        return self.model.family


class GofReport(BaseModel):
    """Goodness-of-fit statistics for one model on one dataset."""
    family: Family
    model: Optional[ModelSpec] = None
    neg_loglik: Optional[float] = None
    aic: Optional[float] = None
    bic: Optional[float] = None
    ks: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    n: int
    q: int
    converged: bool = False
    error: Optional[str] = None

    model_config = ConfigDict(frozen=True)

    @property
    def failed(self) -> bool:
        return self.error is not None
