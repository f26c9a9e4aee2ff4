"""
DFT Multi-Beam Array Engine
Steering vectors, DFT beam gains and pattern sampling shared by every other service
"""
import math
from typing import Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel

from app.core.config import settings
from app.core.exceptions import IndexRangeError, ValidationError
from app.schemas.array import TWO_PI, ArrayConfig, GainGrid, wrap_angle

ArrayLike = Union[float, Sequence[float], np.ndarray]


class PatternFeatures(BaseModel):
    peak_u: float
    first_null_beamwidth: float
    first_sidelobe_db: float


def default_u_grid(points: Optional[int] = None) -> np.ndarray:
    """Uniform grid over [-pi, pi)."""
    points = points or settings.ANGLE_GRID_POINTS
    return np.linspace(-math.pi, math.pi, points, endpoint=False)


def circle_u_grid(points: Optional[int] = None) -> np.ndarray:
    """Uniform grid over [0, 2pi), the axis used for wideband maps."""
    points = points or settings.ANGLE_GRID_POINTS
    return np.linspace(0.0, TWO_PI, points, endpoint=False)


def check_frequency(f_norm: ArrayLike) -> np.ndarray:
    f = np.atleast_1d(np.asarray(f_norm, dtype=float))
    if np.any(f <= 0) or np.any(f > 1):
        raise ValidationError(f"normalized frequency must lie in (0, 1], got {f_norm}")
    return f


def noise_variance(snr_db: float) -> float:
    """Per-measurement noise power against a unit path through a unit-gain beam."""
    if math.isinf(snr_db) and snr_db > 0:
        return 0.0
    if not math.isfinite(snr_db):
        raise ValidationError(f"snr_db must be finite or +inf, got {snr_db}")
    return 10.0 ** (-snr_db / 10.0)


def complex_noise(rng: np.random.Generator, variance: float, size) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples."""
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


class ArrayEngine:
    """Ideal DFT map between N beam ports and N antennas"""

    @staticmethod
    def check_beam(config: ArrayConfig, beam: int, name: str = "beam") -> int:
        if not 0 <= beam < config.n_beams:
            raise IndexRangeError(name, beam, config.n_beams)
        return beam

    @staticmethod
    def sign(config: ArrayConfig) -> float:
        return -1.0 if config.dft_sign == "negative" else 1.0

    def dft_weight(self, config: ArrayConfig, beam: int, antenna: int) -> complex:
        """(n, m) entry of the DFT matrix, exp(sign * j*2*pi*n*m/N)."""
        self.check_beam(config, beam)
        self.check_beam(config, antenna, "antenna")
        phase = self.sign(config) * TWO_PI * ((beam * antenna) % config.n_beams) / config.n_beams
        return complex(math.cos(phase), math.sin(phase))

    def dft_matrix(self, config: ArrayConfig) -> np.ndarray:
        idx = np.arange(config.n_beams)
        exponent = np.outer(idx, idx) % config.n_beams
        return np.exp(1j * self.sign(config) * TWO_PI * exponent / config.n_beams)

    @staticmethod
    def physical_to_beamspace(alpha_deg: float, spacing: float = 0.5) -> float:
        """u = 2*pi*d*cos(alpha)/lambda, d given in wavelengths."""
        if spacing <= 0:
            raise ValidationError(f"spacing must be positive, got {spacing}")
        if not 0.0 <= alpha_deg <= 180.0:
            raise ValidationError(f"physical angle {alpha_deg} outside [0, 180] degrees")
        return TWO_PI * spacing * math.cos(math.radians(alpha_deg))

    @staticmethod
    def beamspace_to_physical(u: float, spacing: float = 0.5) -> Optional[float]:
        """Physical angle in degrees, or None when u lies outside the visible region."""
        if spacing <= 0:
            raise ValidationError(f"spacing must be positive, got {spacing}")
        c = u / (TWO_PI * spacing)
        if abs(c) > 1.0 + 1e-12:
            return None
        return math.degrees(math.acos(max(-1.0, min(1.0, c))))

    def beam_pointing(self, config: ArrayConfig, beam: int) -> float:
        self.check_beam(config, beam)
        return wrap_angle(TWO_PI * beam / config.n_beams)

    @staticmethod
    def pointings(config: ArrayConfig) -> np.ndarray:
        """Unwrapped pointings 2*pi*n/N in [0, 2pi)."""
        return TWO_PI * np.arange(config.n_beams) / config.n_beams

    @staticmethod
    def dirichlet(N: int, phi: ArrayLike):
        """sin(N*phi/2) / sin(phi/2), the removable singularities filled with +-N."""
        if N < 2:
            raise ValidationError(f"N must be at least 2, got {N}")
        phi_arr = np.asarray(phi, dtype=float)
        den = np.sin(phi_arr / 2.0)
        singular = np.abs(den) < 1e-12
        safe_den = np.where(singular, 1.0, den)
        value = np.where(
            singular,
            N * np.cos(N * phi_arr / 2.0) / np.cos(phi_arr / 2.0),
            np.sin(N * phi_arr / 2.0) / safe_den,
        )
        if value.ndim == 0:
            return float(value)
        return value

    def steering_vector(self, config: ArrayConfig, u: float, f_norm: float = 1.0) -> np.ndarray:
        """Element m carries phase m*u*f_norm."""
        f = float(check_frequency(f_norm)[0])
        m = np.arange(config.n_beams)
        return np.exp(1j * m * u * f)

    def beam_gain(self, config: ArrayConfig, beam: int, u: float, f_norm: float = 1.0) -> complex:
        """Inner product of DFT row `beam` with the steering vector, 0 dB at the beam peak."""
        self.check_beam(config, beam)
        a = self.steering_vector(config, u, f_norm)
        if config.dft_sign == "positive":
            a = np.conj(a)
        row = self.dft_matrix(config)[beam]
        return complex(row @ a / config.n_beams)

    def beam_gain_grid(self, config: ArrayConfig, u_grid: ArrayLike, f_norm: float = 1.0) -> np.ndarray:
        """Closed-form gains of every beam: array of shape (len(u_grid), N)."""
        f = float(check_frequency(f_norm)[0])
        N = config.n_beams
        u = np.atleast_1d(np.asarray(u_grid, dtype=float))
        phi = u[:, None] * f - self.pointings(config)[None, :]
        # negative-exponent DFT sums exp(+j*m*phi); the positive one sums exp(-j*m*phi)
        phase = np.exp(-self.sign(config) * 1j * (N - 1) * phi / 2.0)
        return phase * self.dirichlet(N, phi) / N

    def sample_pattern(
        self,
        config: ArrayConfig,
        weights: ArrayLike,
        u_grid: ArrayLike,
        f_grid: ArrayLike = (1.0,),
    ) -> GainGrid:
        """values[i][j] = sum_n weights[n] * beam_gain(n, u_grid[i], f_grid[j])."""
        w = np.asarray(weights, dtype=complex)
        if w.shape != (config.n_beams,):
            raise ValidationError(
                f"weights length {w.size} does not match n_beams={config.n_beams}"
            )
        u = np.atleast_1d(np.asarray(u_grid, dtype=float))
        f = check_frequency(f_grid)

        values = np.empty((u.size, f.size), dtype=complex)
        for j, fj in enumerate(f):
            values[:, j] = self.beam_gain_grid(config, u, fj) @ w

        try:
            return GainGrid(u_grid=u, f_grid=f, values=values)
        except ValueError as e:
            raise ValidationError(str(e)) from e

    @staticmethod
    def pattern_features(u_grid: np.ndarray, magnitude: np.ndarray) -> PatternFeatures:
        """First-null beamwidth and first sidelobe of a single-peaked pattern.

        The grid is taken as uniform and circular.
        """
        mag = np.asarray(magnitude, dtype=float)
        size = mag.size
        step = float(u_grid[1] - u_grid[0])
        peak = int(np.argmax(mag))

        def walk(start: int, direction: int, descending: bool) -> int:
            idx, steps = start, 0
            while steps < size:
                nxt = (idx + direction) % size
                if (mag[nxt] < mag[idx]) != descending or mag[nxt] == mag[idx]:
                    break
                idx, steps = nxt, steps + 1
            return steps

        right_null = walk(peak, 1, True)
        left_null = walk(peak, -1, True)
        right_lobe = (peak + right_null + walk((peak + right_null) % size, 1, False)) % size
        left_lobe = (peak - left_null - walk((peak - left_null) % size, -1, False)) % size

        sidelobe = max(mag[right_lobe], mag[left_lobe])
        return PatternFeatures(
            peak_u=float(u_grid[peak]),
            first_null_beamwidth=(right_null + left_null) * step,
            first_sidelobe_db=float(20.0 * np.log10(sidelobe / mag[peak])),
        )


array_engine = ArrayEngine()
