"""
Command-line run configuration and report envelope models.
"""

from enum import Enum
from typing import Any, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from egl_toolkit.models.distribution import Family, SamplingMethod
from egl_toolkit.models.fitting import InformationMode


class Command(str, Enum):
    """CLI subcommands."""
    FIT = "fit"
    COMPARE = "compare"
    EVAL = "eval"
    SAMPLE = "sample"
    DESCRIBE = "describe"


class OutputFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class EvalQuantity(str, Enum):
    """Columns the eval command can tabulate."""
    PDF = "pdf"
    CDF = "cdf"
    SURVIVAL = "survival"
    HAZARD = "hazard"
    QUANTILE = "quantile"
    MRL = "mrl"


class GridSpec(BaseModel):
    """Evenly spaced evaluation grid ``start:stop:count``."""
    start: float
    stop: float
    count: int = Field(ge=1)

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_monotone(self) -> "GridSpec":
        if self.stop < self.start:
            raise ValueError(f"grid must be increasing, got {self.start}:{self.stop}")
        if self.count > 1 and self.stop == self.start:
            raise ValueError("grid with several points needs stop > start")
        return self

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like start:stop:count, got '{text}'")
        start, stop, count = parts
        return cls(start=float(start), stop=float(stop), count=int(count))

    def points(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def __str__(self) -> str:
        return f"{self.start!r}:{self.stop!r}:{self.count}"


class RunConfig(BaseModel):
    """Everything needed to rerun one CLI invocation."""
    command: Command
    dataset: Optional[str] = None
    data: Optional[str] = None
    column: Optional[str] = None
    families: List[Family] = Field(default_factory=list)
    seed: int
    out: Optional[str] = None
    format: OutputFormat = OutputFormat.JSON
    level: float = 0.95
    information: InformationMode = InformationMode.OBSERVED
    params: Optional[Tuple[float, float, float]] = None
    grid: Optional[GridSpec] = None
    which: EvalQuantity = EvalQuantity.PDF
    method: SamplingMethod = SamplingMethod.INVERSE_TRANSFORM
    n: Optional[int] = Field(default=None, ge=1)
    zeta: float = 2.0

    model_config = ConfigDict(frozen=True)

    @field_validator("level")
    @classmethod
    def validate_level(cls, v: float) -> float:
        if not 0 < v < 1:
            raise ValueError("Confidence level must be between 0 and 1")
        return v

    @field_validator("seed")
    @classmethod
    def validate_seed(cls, v: int) -> int:
        if not 0 <= v < 2 ** 64:
            raise ValueError("Seed must be an unsigned 64-bit integer")
        return v


class ReportEnvelope(BaseModel):
    """Reproducibility header wrapped around every emitted result."""
    version: str
    seed: int
    dataset_digest: Optional[str] = None
    config: RunConfig
    result: Any

    model_config = ConfigDict(frozen=True)
