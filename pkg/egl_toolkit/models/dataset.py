"""
Dataset model for lifetime observations.
"""

import hashlib
import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator


class Dataset(BaseModel):
    """Named, ordered list of strictly positive observations."""
    name: str
    values: Tuple[float, ...]
    source: str = ""

    model_config = ConfigDict(frozen=True)

    @field_validator("values")
    @classmethod
    def validate_values(cls, v: Tuple[float, ...]) -> Tuple[float, ...]:
        if len(v) == 0:
            raise ValueError("Dataset must contain at least one observation")
        for idx, value in enumerate(v):
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"Observation {idx + 1} must be strictly positive and finite, got {value}")
        return v

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    @property
    def digest(self) -> str:
        """SHA-256 of the sorted values, one ``%.6f`` token per line."""
        text = "\n".join(f"{value:.6f}" for value in sorted(self.values))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()

    def summary(self) -> dict:
        data = self.array
        return {
            "name": self.name,
            "n": self.n,
            "min": float(data.min()),
            "max": float(data.max()),
            "mean": float(data.mean()),
            "digest": self.digest,
        }
