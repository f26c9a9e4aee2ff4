from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class FrequencyBand(BaseModel):
    """Normalized band [rho, 1], rho being the lowest normalized frequency"""
    model_config = ConfigDict(frozen=True)

    rho: float = Field(gt=0, lt=1)
    n_points: int = Field(default=64, ge=8)

    @property
    def frequencies(self) -> np.ndarray:
        return np.linspace(self.rho, 1.0, self.n_points)


class FrequencyProfile(BaseModel):
    """Gain magnitude against frequency at one incidence angle"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    frequencies: np.ndarray
    powers: np.ndarray
    reference_peak: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_profile(self) -> "FrequencyProfile":
        if self.powers.shape != self.frequencies.shape:
            raise ValueError("powers and frequencies must have equal length")
        if np.any(self.powers < 0):
            raise ValueError("profile magnitudes must be non-negative")
        return self

    def levels_db(self) -> np.ndarray:
        mag = np.maximum(self.powers / self.reference_peak, 1e-15)
        return 20.0 * np.log10(mag)


class RegionLabel(str, Enum):
    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"


class RegionDecision(BaseModel):
    label: RegionLabel
    flagged: bool = False


class ProfileMatch(BaseModel):
    beam: int
    residual: float


class RegionRun(BaseModel):
    label: RegionLabel
    u_start: float
    u_stop: float
    count: int
