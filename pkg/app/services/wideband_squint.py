"""
Wideband Squint Service
Beam-shift law, squint-compensated selection and frequency-profile region location
"""
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.core.config import settings
from app.core.exceptions import ValidationError
from app.core.logging import logger
from app.schemas.array import TWO_PI, ArrayConfig, GainGrid, SelectionVector
from app.schemas.squint import (
    FrequencyBand,
    FrequencyProfile,
    ProfileMatch,
    RegionDecision,
    RegionLabel,
    RegionRun,
)
from app.services.array_core import array_engine, circle_u_grid
from app.services.beam_synthesis import beam_synthesizer


class SquintAnalyzer:
    """
    Frequency-dependent behaviour of fixed DFT beams.

    Angles here use the unwrapped [0, 2pi) axis: u*f is not 2pi-periodic in u,
    so wrapping before scaling would move the beam.
    """

    @staticmethod
    def shifted_beam_index(n: int, rho: float) -> int:
        """Beam whose pointing the lowest frequency sees through beam n (round half up)."""
        if n < 0:
            raise ValidationError(f"beam index must be non-negative, got {n}")
        if not 0 < rho < 1:
            raise ValidationError(f"rho must lie in (0, 1), got {rho}")
        return int(math.floor(n / rho + 0.5))

    @staticmethod
    def band(rho: float, n_points: Optional[int] = None) -> FrequencyBand:
        return FrequencyBand(rho=rho, n_points=n_points or settings.FREQ_GRID_POINTS)

    def wideband_gain_map(
        self,
        config: ArrayConfig,
        sel: SelectionVector,
        band: FrequencyBand,
        u_grid=None,
    ) -> GainGrid:
        beam_synthesizer.check_selection(config, sel)
        u_grid = circle_u_grid() if u_grid is None else u_grid
        return array_engine.sample_pattern(config, sel.applied_weights(), u_grid, band.frequencies)

    def squint_compensated_selection(
        self, config: ArrayConfig, target_beam: int, band: FrequencyBand
    ) -> SelectionVector:
        """Select beams n..x, n being the first beam that shifts onto x or beyond."""
        x = target_beam
        first = 0
        while first < x and self.shifted_beam_index(first, band.rho) < x:
            first += 1

        if not 0 <= x < config.n_beams:
            lo = min(max(first, 0), config.n_beams - 1)
            raise ValidationError(
                f"selection {first}..{x} leaves the beam index space [0, {config.n_beams}); "
                f"closest valid selection is {lo}..{config.n_beams - 1}"
            )

        logger.debug(f"Squint compensation for beam {x} at rho={band.rho}: beams {first}..{x}")
        return beam_synthesizer.run_selection(config, list(range(first, x + 1)))

    def frequency_profile(
        self,
        config: ArrayConfig,
        sel: SelectionVector,
        band: FrequencyBand,
        u: float,
        reference_peak: float = 1.0,
    ) -> FrequencyProfile:
        grid = self.wideband_gain_map(config, sel, band, [u])
        return FrequencyProfile(
            frequencies=band.frequencies,
            powers=grid.magnitude()[0],
            reference_peak=reference_peak,
        )

    def reference_profiles(
        self,
        config: ArrayConfig,
        sel: SelectionVector,
        band: FrequencyBand,
        beams: Sequence[int],
        reference_peak: float = 1.0,
    ) -> Dict[int, FrequencyProfile]:
        """Profiles observed from incidence at each listed beam's pointing."""
        u = array_engine.pointings(config)
        return {
            int(n): self.frequency_profile(config, sel, band, float(u[n]), reference_peak)
            for n in beams
        }

    @staticmethod
    def classify_region(
        profile: FrequencyProfile,
        high_thresh_db: Optional[float] = None,
        low_thresh_db: Optional[float] = None,
    ) -> RegionDecision:
        high_db = settings.REGION_HIGH_DB if high_thresh_db is None else high_thresh_db
        low_db = settings.REGION_LOW_DB if low_thresh_db is None else low_thresh_db
        if not low_db < high_db:
            raise ValidationError(f"low threshold {low_db} must be below high threshold {high_db}")

        levels = profile.levels_db()
        high = levels >= high_db
        if np.all(high):
            return RegionDecision(label=RegionLabel.R3)
        if np.all(levels <= low_db):
            return RegionDecision(label=RegionLabel.R1)

        idx = np.flatnonzero(high)
        if idx.size == 0:
            label = RegionLabel.R2 if levels[-1] >= levels[0] else RegionLabel.R4
            return RegionDecision(label=label)

        contiguous = idx[-1] - idx[0] + 1 == idx.size
        at_low_end, at_high_end = bool(high[0]), bool(high[-1])
        if at_high_end and not at_low_end:
            return RegionDecision(label=RegionLabel.R2, flagged=not contiguous)
        if at_low_end and not at_high_end:
            return RegionDecision(label=RegionLabel.R4, flagged=not contiguous)
        if at_low_end and at_high_end:
            return RegionDecision(label=RegionLabel.R3, flagged=True)

        # high portion strictly inside the band: side it leans to
        centre = (levels.size - 1) / 2.0
        label = RegionLabel.R2 if idx.mean() >= centre else RegionLabel.R4
        return RegionDecision(label=label, flagged=True)

    @staticmethod
    def match_beam_by_profile(
        profile: FrequencyProfile, reference_profiles: Dict[int, FrequencyProfile]
    ) -> ProfileMatch:
        """Nearest reference by least squares between unit-norm profiles."""
        if not reference_profiles:
            raise ValidationError("no reference profiles to match against")

        def unit(v: np.ndarray) -> np.ndarray:
            norm = np.linalg.norm(v)
            return v / norm if norm > 0 else v

        observed = unit(profile.powers)
        best: Optional[ProfileMatch] = None
        for beam in sorted(reference_profiles):
            ref = reference_profiles[beam].powers
            if ref.shape != observed.shape:
                raise ValidationError(
                    f"reference for beam {beam} has {ref.size} points, profile has {observed.size}"
                )
            residual = float(np.sum((observed - unit(ref)) ** 2))
            if best is None or residual < best.residual:
                best = ProfileMatch(beam=beam, residual=residual)
        return best

    def region_sweep(
        self,
        config: ArrayConfig,
        sel: SelectionVector,
        band: FrequencyBand,
        u_grid=None,
        high_thresh_db: Optional[float] = None,
        low_thresh_db: Optional[float] = None,
    ) -> List[RegionRun]:
        """
        Label every angle of a sweep and collapse the labels into contiguous runs.

        Levels are taken relative to the map peak. The sweep axis is a circle, so a
        final run carrying the first run's label is merged into it.
        """
        grid = self.wideband_gain_map(config, sel, band, u_grid)
        mag = grid.magnitude()
        peak = float(mag.max())
        if peak <= 0:
            raise ValidationError("selection radiates no power over the sweep")

        labels = []
        for i in range(grid.u_grid.size):
            profile = FrequencyProfile(
                frequencies=grid.f_grid, powers=mag[i], reference_peak=peak
            )
            labels.append(self.classify_region(profile, high_thresh_db, low_thresh_db).label)

        runs: List[RegionRun] = []
        for u, label in zip(grid.u_grid, labels):
            if runs and runs[-1].label == label:
                last = runs[-1]
                runs[-1] = last.model_copy(update={"u_stop": float(u), "count": last.count + 1})
            else:
                runs.append(RegionRun(label=label, u_start=float(u), u_stop=float(u), count=1))

        if len(runs) > 1 and runs[0].label == runs[-1].label:
            tail = runs.pop()
            runs[0] = runs[0].model_copy(update={
                "u_start": tail.u_start - TWO_PI,
                "count": runs[0].count + tail.count,
            })

        logger.debug(f"Region sweep: {[run.label.value for run in runs]}")
        return runs


squint_analyzer = SquintAnalyzer()
