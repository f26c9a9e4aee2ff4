"""
Beam Synthesis Service
Select DFT beams with alternating signs to build flat, possibly non-contiguous mainlobes
"""
import math
from typing import Dict, List, Sequence, Tuple

import numpy as np

from app.core.exceptions import ValidationError
from app.core.logging import logger
from app.schemas.array import (
    TWO_PI,
    AngularInterval,
    ArrayConfig,
    SelectionVector,
    contiguous_runs,
)
from app.services.array_core import array_engine, check_frequency

# Minimum overlap (rad) between a beam cell and a target before the beam is selected
CELL_OVERLAP_TOL = 1e-9


class BeamSynthesizer:
    """Synthesize wide beams from {-1, 0, +1} beam selections"""

    @staticmethod
    def check_selection(config: ArrayConfig, sel: SelectionVector) -> None:
        if sel.n_beams != config.n_beams:
            raise ValidationError(
                f"selection has {sel.n_beams} ports, array has {config.n_beams}"
            )
        if sel.k == 0:
            raise ValidationError("selection has no non-zero weight")

    @staticmethod
    def beam_cell(config: ArrayConfig, beam: int) -> Tuple[float, float]:
        """(lo, width) of the crossover cell u_n +- pi/N."""
        half = math.pi / config.n_beams
        return TWO_PI * beam / config.n_beams - half, 2 * half

    def beams_covering(self, config: ArrayConfig, target: AngularInterval) -> List[int]:
        """Beams whose crossover cells overlap the target, in circular order from lo."""
        chosen = []
        for beam in range(config.n_beams):
            lo, width = self.beam_cell(config, beam)
            if target.overlap(lo, width) > CELL_OVERLAP_TOL:
                chosen.append(beam)
        runs = contiguous_runs(chosen, config.n_beams)
        if not runs:
            raise ValidationError(
                f"target [{target.lo:.4f}, {target.hi:.4f}] does not reach any beam cell"
            )
        # one interval always maps to a single circular run
        return runs[0]

    @staticmethod
    def alternating_signs(runs: Sequence[Sequence[int]]) -> Dict[int, int]:
        """+1, -1, +1, ... along each run; every run restarts at +1.

        A full ring of odd length cannot alternate all the way round: the last and
        first beams of the run (N-1 and 0) then both carry +1.
        """
        signs: Dict[int, int] = {}
        for run in runs:
            for position, beam in enumerate(run):
                signs[beam] = 1 if position % 2 == 0 else -1
        return signs

    def synthesize_mainlobes(
        self,
        config: ArrayConfig,
        targets: Sequence[AngularInterval],
        normalization: str = "unit",
    ) -> SelectionVector:
        if not targets:
            raise ValidationError("at least one target interval is required")

        for i, first in enumerate(targets):
            for second in targets[i + 1:]:
                if first.overlap(second.lo, second.width) > CELL_OVERLAP_TOL:
                    raise ValidationError(
                        f"targets [{first.lo:.4f}, {first.hi:.4f}] and "
                        f"[{second.lo:.4f}, {second.hi:.4f}] overlap"
                    )

        covered: List[int] = []
        for target in targets:
            covered.extend(self.beams_covering(config, target))
        # cells of neighbouring targets may touch or share a beam; such runs merge
        runs = contiguous_runs(covered, config.n_beams)
        if len(runs) < len(targets):
            logger.warning(
                f"{len(targets)} targets share beam cells; synthesizing {len(runs)} run(s)"
            )

        sel = SelectionVector.from_beams(
            config.n_beams, self.alternating_signs(runs), normalization=normalization
        )
        logger.debug(f"Synthesized {len(runs)} run(s): {sel.to_text()}")
        return sel

    def run_selection(
        self, config: ArrayConfig, beams: Sequence[int], normalization: str = "unit"
    ) -> SelectionVector:
        """Alternating-sign selection of an explicit, circularly ordered run of beams."""
        if not beams:
            raise ValidationError("no beams to select")
        for beam in beams:
            array_engine.check_beam(config, beam % config.n_beams)
        signs = self.alternating_signs([[b % config.n_beams for b in beams]])
        return SelectionVector.from_beams(config.n_beams, signs, normalization=normalization)

    def base2_beam(self, config: ArrayConfig, n: int) -> SelectionVector:
        """Beams n and n+1 (mod N) with weights (+1, -1)."""
        array_engine.check_beam(config, n)
        return SelectionVector.from_beams(config.n_beams, {n: 1, (n + 1) % config.n_beams: -1})

    @staticmethod
    def base2_pointing(config: ArrayConfig, n: int) -> float:
        """Unwrapped crossover angle u_n + pi/N."""
        return TWO_PI * n / config.n_beams + math.pi / config.n_beams

    def combined_gain(
        self, config: ArrayConfig, sel: SelectionVector, u: float, f_norm: float = 1.0
    ) -> complex:
        self.check_selection(config, sel)
        gains = array_engine.beam_gain_grid(config, [u], f_norm)[0]
        return complex(gains @ sel.applied_weights())

    def combined_gain_grid(
        self, config: ArrayConfig, sel: SelectionVector, u_grid, f_norm: float = 1.0
    ) -> np.ndarray:
        self.check_selection(config, sel)
        return array_engine.beam_gain_grid(config, u_grid, f_norm) @ sel.applied_weights()

    def mainlobe_ripple(
        self,
        config: ArrayConfig,
        sel: SelectionVector,
        target: AngularInterval,
        points: int = 2048,
    ) -> Tuple[float, float]:
        """(min_db, max_db) of the combined gain over the target interior."""
        margin = TWO_PI / config.n_beams
        if target.width <= 2 * margin:
            raise ValidationError(
                f"target width {target.width:.4f} leaves no interior after {margin:.4f} margins"
            )
        u = target.lo + margin + np.linspace(0.0, target.width - 2 * margin, points)
        gain_db = 20.0 * np.log10(np.abs(self.combined_gain_grid(config, sel, u)))
        return float(gain_db.min()), float(gain_db.max())

    def pattern_db(
        self, config: ArrayConfig, sel: SelectionVector, u_grid, f_norm: float = 1.0
    ) -> np.ndarray:
        check_frequency(f_norm)
        mag = np.abs(self.combined_gain_grid(config, sel, u_grid, f_norm))
        return 20.0 * np.log10(np.maximum(mag, 1e-15))


beam_synthesizer = BeamSynthesizer()
