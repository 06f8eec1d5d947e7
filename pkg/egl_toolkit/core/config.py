"""
Configuration settings for the EGL toolkit.
"""

from pydantic import field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Toolkit settings loaded from environment variables."""

    # Application Configuration
    app_name: str = "EGL Toolkit"
    app_version: str = "1.0.0"
    debug: bool = False
    log_level: str = "WARNING"

    # Reproducibility
    default_seed: int = 20160415

    # Quadrature Configuration
    quad_abs_tol: float = 1e-12
    quad_rel_tol: float = 1e-10
    quad_limit: int = 1000

    # Special Function Configuration
    lambert_max_iter: int = 100
    gamma_max_iter: int = 1000

    # Optimizer Configuration
    simplex_max_iter: int = 2000
    max_starts: int = 25
    best_grid_starts: int = 5
    grid_points: int = 5
    grid_low: float = 0.01
    grid_high: float = 10.0
    score_tol_per_obs: float = 1e-4
    param_floor: float = 1e-8
    param_ceiling: float = 1e8

    # Reporting Configuration
    confidence_level: float = 0.95
    output_format: str = "json"

    model_config = SettingsConfigDict(
        env_prefix="EGL_",
        env_file=".env",
        case_sensitive=False,
        extra="ignore",
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate that the log level is one the logging module knows."""
        allowed_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        if v.upper() not in allowed_levels:
            raise ValueError(f"Log level must be one of: {allowed_levels}")
        return v.upper()

    @field_validator(
        "quad_abs_tol", "quad_rel_tol", "score_tol_per_obs",
        "grid_low", "grid_high", "param_floor", "param_ceiling",
    )
    @classmethod
    def validate_positive(cls, v: float) -> float:
        """Tolerances and grid bounds must be strictly positive."""
        if not v > 0:
            raise ValueError("Value must be strictly positive")
        return v

    @field_validator(
        "quad_limit", "lambert_max_iter", "gamma_max_iter",
        "simplex_max_iter", "max_starts", "best_grid_starts", "grid_points",
    )
    @classmethod
    def validate_counts(cls, v: int) -> int:
        """Iteration caps and counts must be at least one."""
        if v < 1:
            raise ValueError("Count must be at least 1")
        return v

    @field_validator("confidence_level")
    @classmethod
    def validate_level(cls, v: float) -> float:
        """Validate that the confidence level is a probability."""
        if not 0 < v < 1:
            raise ValueError("Confidence level must be between 0 and 1")
        return v

    @field_validator("output_format")
    @classmethod
    def validate_output_format(cls, v: str) -> str:
        allowed_formats = ["json", "csv"]
        if v not in allowed_formats:
            raise ValueError(f"Output format must be one of: {allowed_formats}")
        return v

    @model_validator(mode="after")
    def validate_grid(self) -> "Settings":
        """The multi-start grid and the parameter box must span nonempty ranges."""
        if self.grid_low >= self.grid_high:
            raise ValueError(f"grid_low ({self.grid_low}) must be below grid_high ({self.grid_high})")
        if self.param_floor >= self.param_ceiling:
            raise ValueError(f"param_floor ({self.param_floor}) must be below param_ceiling ({self.param_ceiling})")
        return self


# Create global settings instance
settings = Settings()
