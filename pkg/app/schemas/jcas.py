from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.schemas.array import SelectionVector


class JcasConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    n_beams: int = Field(ge=2)
    comm_beam: int = Field(default=0, ge=0)
    n_sensing: int = Field(ge=1)
    scheme: Literal["type1", "type2"] = "type1"
    time_units: int = Field(default=1000, ge=1)
    rng_seed: int = 0
    # Type-1 only: first sensing index at t=0; defaults to the x beams ending just before comm
    sensing_start: Optional[int] = None
    collision: Literal["skip", "substitute"] = "skip"

    @model_validator(mode="after")
    def check_ranges(self) -> "JcasConfig":
        if self.comm_beam >= self.n_beams:
            raise ValueError(f"comm_beam={self.comm_beam} outside [0, {self.n_beams})")
        if self.n_sensing > self.n_beams - 1:
            raise ValueError(f"n_sensing={self.n_sensing} exceeds N-1={self.n_beams - 1}")
        if self.sensing_start is not None and not 0 <= self.sensing_start < self.n_beams:
            raise ValueError(f"sensing_start={self.sensing_start} outside [0, {self.n_beams})")
        return self

    @property
    def start(self) -> int:
        if self.sensing_start is not None:
            return self.sensing_start
        return (self.comm_beam - self.n_sensing) % self.n_beams


class JcasSchedule(BaseModel):
    model_config = ConfigDict(frozen=True)

    config: JcasConfig
    selections: Tuple[SelectionVector, ...]

    @property
    def time_units(self) -> int:
        return len(self.selections)

    def sensing_sets(self) -> List[List[int]]:
        comm = self.config.comm_beam
        return [[n for n in sel.support if n != comm] for sel in self.selections]

    def weight_matrix(self) -> np.ndarray:
        """T x N applied weights (normalization included)."""
        return np.stack([sel.applied_weights() for sel in self.selections])


class ApgCurve(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u_grid: np.ndarray
    apg: np.ndarray

    def db(self) -> np.ndarray:
        return 10.0 * np.log10(np.maximum(self.apg, 1e-30))


class TradeoffRow(BaseModel):
    x: int
    comm_gain: float
    sensing_apg: float
    comm_db: float
    sensing_db: float


class SecrecyMap(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u_grid: np.ndarray
    gains: np.ndarray  # T x U complex
    amp_mean: np.ndarray
    amp_std: np.ndarray
    phase_mean: np.ndarray
    phase_std: np.ndarray
