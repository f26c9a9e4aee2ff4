import math
from typing import Dict, List, Literal, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

TWO_PI = 2.0 * math.pi


def wrap_angle(u):
    """Wrap a beamspace angle (scalar or array) into [-pi, pi)."""
    wrapped = np.mod(np.asarray(u, dtype=float) + math.pi, TWO_PI) - math.pi
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def circular_distance(a, b):
    """Smallest absolute angular separation between a and b."""
    return np.abs(wrap_angle(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


class ArrayConfig(BaseModel):
    """An N-port DFT multi-beam antenna array"""
    model_config = ConfigDict(frozen=True)

    n_beams: int = Field(ge=2)
    spacing: float = Field(default=0.5, gt=0)  # in reference wavelengths
    dft_sign: Literal["negative", "positive"] = "negative"
    gain_reference: Literal["single-beam-peak"] = "single-beam-peak"

    @property
    def beam_spacing(self) -> float:
        return TWO_PI / self.n_beams


class AngularInterval(BaseModel):
    """Wrapping interval on the beamspace circle, from lo counter-clockwise to hi"""
    model_config = ConfigDict(frozen=True)

    lo: float
    hi: float

    @property
    def width(self) -> float:
        width = self.hi - self.lo
        if width <= 0:
            width += TWO_PI
        return width

    @model_validator(mode="after")
    def check_width(self) -> "AngularInterval":
        width = self.width
        if not (0 < width <= TWO_PI + 1e-12):
            raise ValueError(f"interval width {width} outside (0, 2pi]")
        return self

    @classmethod
    def full_circle(cls) -> "AngularInterval":
        return cls(lo=-math.pi, hi=math.pi)

    def offset(self, u) -> np.ndarray:
        """Counter-clockwise distance of u from lo, in [0, 2pi)."""
        return np.mod(np.asarray(u, dtype=float) - self.lo, TWO_PI)

    def contains(self, u, tol: float = 1e-12):
        return self.offset(u) <= self.width + tol

    def overlap(self, lo: float, width: float) -> float:
        """Length of the intersection with the arc [lo, lo + width]."""
        if self.width >= TWO_PI - 1e-12:
            return width
        total = 0.0
        start = float(self.offset(lo))
        # Arc may straddle the interval start; check both unrolled copies
        for shift in (start, start - TWO_PI):
            a = max(shift, 0.0)
            b = min(shift + width, self.width)
            total += max(0.0, b - a)
        return total


class SelectionVector(BaseModel):
    """Per-beam-port weights in {-1, 0, +1} feeding one RF chain"""
    model_config = ConfigDict(frozen=True)

    weights: Tuple[int, ...]
    normalization: Literal["unit", "even-power-split"] = "unit"
    # switch-only: every 1-bit phase shifter parked at zero, so no sign reversal
    hardware: Literal["sign-switch", "switch-only"] = "sign-switch"

    @field_validator("weights")
    @classmethod
    def check_weights(cls, weights: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(weights) < 2:
            raise ValueError("a selection vector needs at least two beam ports")
        bad = [w for w in weights if w not in (-1, 0, 1)]
        if bad:
            raise ValueError(f"weights must be -1, 0 or +1, got {bad[0]}")
        return weights

    @model_validator(mode="after")
    def check_hardware(self) -> "SelectionVector":
        if self.hardware == "switch-only" and any(w < 0 for w in self.weights):
            raise ValueError("switch-only networks cannot realise a -1 weight")
        return self

    @property
    def n_beams(self) -> int:
        return len(self.weights)

    @property
    def support(self) -> List[int]:
        return [n for n, w in enumerate(self.weights) if w != 0]

    @property
    def k(self) -> int:
        return len(self.support)

    @property
    def amplitude(self) -> float:
        """Amplitude applied to every selected beam."""
        if self.normalization == "even-power-split" and self.k > 0:
            return 1.0 / math.sqrt(self.k)
        return 1.0

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    def applied_weights(self) -> np.ndarray:
        return self.as_array() * self.amplitude

    def selected_runs(self) -> List[List[int]]:
        """Contiguous runs of selected beams, adjacency taken around the circle."""
        return contiguous_runs(self.support, self.n_beams)

    def with_normalization(self, normalization: str) -> "SelectionVector":
        return self.model_copy(update={"normalization": normalization})

    def to_text(self) -> str:
        return ",".join("0" if w == 0 else f"{w:+d}" for w in self.weights)

    @classmethod
    def from_text(cls, text: str, **kwargs) -> "SelectionVector":
        try:
            weights = tuple(int(token) for token in text.replace(" ", "").split(","))
        except ValueError as e:
            raise ValueError(f"cannot parse selection '{text}': {e}") from e
        return cls(weights=weights, **kwargs)

    @classmethod
    def one_hot(cls, n_beams: int, beam: int, **kwargs) -> "SelectionVector":
        weights = [0] * n_beams
        weights[beam % n_beams] = 1
        return cls(weights=tuple(weights), **kwargs)

    @classmethod
    def from_beams(cls, n_beams: int, signs: Dict[int, int], **kwargs) -> "SelectionVector":
        weights = [0] * n_beams
        for beam, sign in signs.items():
            weights[beam % n_beams] = sign
        return cls(weights=tuple(weights), **kwargs)


def contiguous_runs(indices, n_beams: int) -> List[List[int]]:
    """Group beam indices into runs of circular neighbours.

    A run that wraps past N-1 is returned in circular order (e.g. [14, 15, 0]).
    With every beam present the single run starts at 0.
    """
    chosen = sorted(set(int(i) % n_beams for i in indices))
    if not chosen:
        return []
    if len(chosen) == n_beams:
        return [chosen]

    runs: List[List[int]] = []
    for idx in chosen:
        if runs and idx == runs[-1][-1] + 1:
            runs[-1].append(idx)
        else:
            runs.append([idx])
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == n_beams - 1:
        runs[0] = runs.pop() + runs[0]
    return runs


class GainGrid(BaseModel):
    """Complex gain sampled over beamspace angle x normalized frequency"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    u_grid: np.ndarray
    f_grid: np.ndarray
    values: np.ndarray

    @model_validator(mode="after")
    def check_shapes(self) -> "GainGrid":
        for name, grid in (("u_grid", self.u_grid), ("f_grid", self.f_grid)):
            if grid.ndim != 1 or grid.size == 0:
                raise ValueError(f"{name} must be a non-empty 1-D array")
            if grid.size > 1 and np.any(np.diff(grid) <= 0):
                raise ValueError(f"{name} must be strictly increasing")
        if np.any(self.f_grid <= 0) or np.any(self.f_grid > 1):
            raise ValueError("normalized frequencies must lie in (0, 1]")
        if self.values.shape != (self.u_grid.size, self.f_grid.size):
            raise ValueError(
                f"values shape {self.values.shape} does not match "
                f"({self.u_grid.size}, {self.f_grid.size})"
            )
        return self

    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)

    def column(self, j: int = 0) -> np.ndarray:
        return self.values[:, j]
