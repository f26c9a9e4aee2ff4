from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator


class IncidentPath(BaseModel):
    """One incident path: beamspace angle and complex amplitude"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u: float
    amplitude: complex = 1.0 + 0.0j

    @field_validator("amplitude", mode="before")
    @classmethod
    def coerce_complex(cls, value) -> complex:
        return complex(value)


class PathSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    paths: Tuple[IncidentPath, ...] = ()

    @classmethod
    def single(cls, u: float, amplitude: complex = 1.0) -> "PathSet":
        return cls(paths=(IncidentPath(u=u, amplitude=amplitude),))

    @property
    def angles(self) -> np.ndarray:
        return np.array([p.u for p in self.paths], dtype=float)

    @property
    def amplitudes(self) -> np.ndarray:
        return np.array([p.amplitude for p in self.paths], dtype=complex)


class Observation(BaseModel):
    """Complex samples, one per configured measurement beam"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    samples: np.ndarray
    snr_db: float

    @property
    def powers(self) -> np.ndarray:
        return np.abs(self.samples) ** 2


class RatioModel(BaseModel):
    """Tabulated delta/sigma curve F(u) between two base-2 beam pointings.

    u_table is unwrapped and ascending from pointing(D) to pointing(E);
    f_table decreases strictly along it.
    """
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    n_beams: int = Field(ge=2)
    beam_triplet: Tuple[int, int, int]
    u_table: np.ndarray
    f_table: np.ndarray

    @property
    def lo(self) -> float:
        return float(self.u_table[0])

    @property
    def hi(self) -> float:
        return float(self.u_table[-1])

    @property
    def width(self) -> float:
        return self.hi - self.lo


class SearchResult(BaseModel):
    base2_index: int
    u_hat: float
    calls: int
    final_beam: int


class RmseRow(BaseModel):
    snr_db: float
    trials: int
    rmse_rad: float
    bias_rad: float
