from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class BhChannel(BaseModel):
    """Effective complex gain from each available beam to the receiver"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    beams: Tuple[int, ...]
    gains: np.ndarray

    @model_validator(mode="after")
    def check_channel(self) -> "BhChannel":
        if len(self.beams) != self.gains.size:
            raise ValueError("one gain per available beam is required")
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("channel gains must be finite")
        return self

    def gain_of(self, beam: int) -> complex:
        return complex(self.gains[self.beams.index(beam)])


class BhCodebook(BaseModel):
    model_config = ConfigDict(frozen=True)

    available_beams: Tuple[int, ...]
    subsets: Tuple[Tuple[int, ...], ...]
    bits_per_symbol: int = Field(ge=0)

    @model_validator(mode="after")
    def check_codebook(self) -> "BhCodebook":
        if len(self.subsets) != 2 ** self.bits_per_symbol:
            raise ValueError(
                f"{len(self.subsets)} subsets for {self.bits_per_symbol} bits/symbol"
            )
        if len(set(self.subsets)) != len(self.subsets):
            raise ValueError("codebook subsets must be distinct")
        available = set(self.available_beams)
        for subset in self.subsets:
            if not subset or not set(subset) <= available:
                raise ValueError(f"subset {subset} is empty or uses unavailable beams")
        return self

    @property
    def size(self) -> int:
        return len(self.subsets)


class BerRow(BaseModel):
    snr_db: float
    symbols: int
    bit_errors: int
    ber: float
