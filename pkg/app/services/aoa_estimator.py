"""
AoA Estimation Service
Snapshot simulation, base-2 delta/sigma ratio estimator and multi-section beam search
"""
import math
import time
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.config import settings
from app.core.exceptions import EstimationError, ModelIntegrityError, ValidationError
from app.core.logging import logger
from app.schemas.aoa import Observation, PathSet, RatioModel, RmseRow, SearchResult
from app.schemas.array import AngularInterval, ArrayConfig, SelectionVector, wrap_angle
from app.services.array_core import array_engine, complex_noise, noise_variance
from app.services.beam_synthesis import beam_synthesizer

Measure = Callable[[SelectionVector], complex]


class MeasurementOracle:
    """
    Seeded snapshot source for search experiments.

    Every call measures one selection against a fixed scene and draws fresh noise
    from its own generator, so a sequence of calls is reproducible from the seed.
    """

    def __init__(
        self,
        config: ArrayConfig,
        scene: PathSet,
        snr_db: float = math.inf,
        seed: Union[int, Sequence[int]] = 0,
    ):
        if not scene.paths:
            raise ValidationError("scene has no incident path")
        self.config = config
        self.scene = scene
        self.snr_db = snr_db
        self.variance = noise_variance(snr_db)
        self.rng = np.random.default_rng(seed)
        self.calls = 0

    def __call__(self, sel: SelectionVector) -> complex:
        self.calls += 1
        gains = beam_synthesizer.combined_gain_grid(self.config, sel, self.scene.angles)
        sample = complex(gains @ self.scene.amplitudes)
        if self.variance > 0:
            sample += complex(complex_noise(self.rng, self.variance, 1)[0])
        return sample


class AoAEstimator:
    """Amplitude-comparison AoA estimation with base-2 wide beams"""

    def __init__(self):
        self._models: Dict[Tuple[ArrayConfig, int, int], RatioModel] = {}

    def simulate_snapshot(
        self,
        config: ArrayConfig,
        selections: Sequence[SelectionVector],
        scene: PathSet,
        snr_db: float,
        rng_seed: int,
    ) -> Observation:
        """One complex sample per selection: sum of path contributions plus noise."""
        if not scene.paths:
            raise ValidationError("scene has no incident path")
        if not selections:
            raise ValidationError("at least one measurement selection is required")

        samples = np.array(
            [
                beam_synthesizer.combined_gain_grid(config, sel, scene.angles) @ scene.amplitudes
                for sel in selections
            ],
            dtype=complex,
        )
        variance = noise_variance(snr_db)
        if variance > 0:
            rng = np.random.default_rng(rng_seed)
            samples = samples + complex_noise(rng, variance, samples.size)
        return Observation(samples=samples, snr_db=snr_db)

    @staticmethod
    def ratio(power_d, power_e):
        return (power_d - power_e) / (power_d + power_e)

    def build_ratio_model(
        self, config: ArrayConfig, n: int, grid_size: Optional[int] = None
    ) -> RatioModel:
        """Tabulate F(u) between the pointings of base2(n) and base2(n+1)."""
        grid_size = grid_size or settings.RATIO_GRID_POINTS
        if grid_size < 64:
            raise ValidationError(f"grid_size must be at least 64, got {grid_size}")
        array_engine.check_beam(config, n)

        key = (config, n, grid_size)
        if key in self._models:
            return self._models[key]

        N = config.n_beams
        beam_d = beam_synthesizer.base2_beam(config, n)
        beam_e = beam_synthesizer.base2_beam(config, (n + 1) % N)
        lo = beam_synthesizer.base2_pointing(config, n)
        u_table = np.linspace(lo, lo + config.beam_spacing, grid_size)

        power_d = np.abs(beam_synthesizer.combined_gain_grid(config, beam_d, u_table)) ** 2
        power_e = np.abs(beam_synthesizer.combined_gain_grid(config, beam_e, u_table)) ** 2
        f_table = self.ratio(power_d, power_e)

        if not np.all(np.diff(f_table) < 0):
            raise ModelIntegrityError(
                f"ratio table for base-2 pair ({n}, {(n + 1) % N}) is not strictly decreasing"
            )
        if not f_table[0] > 0 > f_table[-1]:
            raise ModelIntegrityError(
                f"ratio table endpoints {f_table[0]:.4f}, {f_table[-1]:.4f} do not straddle zero"
            )

        model = RatioModel(
            n_beams=N,
            beam_triplet=(n, (n + 1) % N, (n + 2) % N),
            u_table=u_table,
            f_table=f_table,
        )
        self._models[key] = model
        return model

    @staticmethod
    def invert(model: RatioModel, r) -> np.ndarray:
        """Angle(s) with F(u) = r; values beyond the table clamp to its endpoints."""
        # np.interp wants ascending abscissae
        return np.interp(r, model.f_table[::-1], model.u_table[::-1])

    def estimate_aoa(self, obs: Observation, model: RatioModel) -> float:
        """
        Delta/sigma estimate from the samples (x_D, x_E).

        The returned angle lies in the model's unwrapped interval.
        """
        if obs.samples.size != 2:
            raise ValidationError(
                f"estimator needs two samples (x_D, x_E), got {obs.samples.size}"
            )
        power_d, power_e = obs.powers
        if power_d + power_e <= 0:
            raise EstimationError()
        return float(self.invert(model, self.ratio(power_d, power_e)))

    def estimate_aoa_batch(
        self, samples_d: np.ndarray, samples_e: np.ndarray, model: RatioModel
    ) -> np.ndarray:
        power_d = np.abs(samples_d) ** 2
        power_e = np.abs(samples_e) ** 2
        if np.any(power_d + power_e <= 0):
            raise EstimationError()
        return self.invert(model, self.ratio(power_d, power_e))

    def rmse_sweep(
        self,
        config: ArrayConfig,
        n: int,
        snr_list: Sequence[float],
        trials: int,
        seed: int,
        grid_size: Optional[int] = None,
    ) -> List[RmseRow]:
        """
        Monte Carlo RMSE of the ratio estimator against SNR.

        Angles are uniform over the middle 80% of the base-2 interval. All SNR
        points share the same angles, source phases and unit noise draws.
        """
        if trials < 1:
            raise ValidationError(f"trials must be positive, got {trials}")
        start = time.perf_counter()
        model = self.build_ratio_model(config, n, grid_size)
        beam_d = beam_synthesizer.base2_beam(config, n)
        beam_e = beam_synthesizer.base2_beam(config, (n + 1) % config.n_beams)

        rng = np.random.default_rng(seed)
        u_true = model.lo + model.width * (0.1 + 0.8 * rng.random(trials))
        source = np.exp(1j * rng.uniform(0.0, 2.0 * math.pi, trials))
        unit_noise = complex_noise(rng, 1.0, (2, trials))

        clean_d = beam_synthesizer.combined_gain_grid(config, beam_d, u_true) * source
        clean_e = beam_synthesizer.combined_gain_grid(config, beam_e, u_true) * source

        rows = []
        for snr_db in snr_list:
            sigma = math.sqrt(noise_variance(snr_db))
            u_hat = self.estimate_aoa_batch(
                clean_d + sigma * unit_noise[0], clean_e + sigma * unit_noise[1], model
            )
            err = u_hat - u_true
            rows.append(RmseRow(
                snr_db=snr_db,
                trials=trials,
                rmse_rad=float(np.sqrt(np.mean(err ** 2))),
                bias_rad=float(np.mean(err)),
            ))

        logger.info(
            f"RMSE sweep over {len(rows)} SNR points",
            extra={
                "seed": seed,
                "n_beams": config.n_beams,
                "duration_ms": round((time.perf_counter() - start) * 1000, 1),
            },
        )
        return rows

    @staticmethod
    def exhaustive_scan(config: ArrayConfig, measure: Measure) -> int:
        """Measure every DFT beam in turn; index of the strongest."""
        powers = [abs(measure(SelectionVector.one_hot(config.n_beams, n))) ** 2
                  for n in range(config.n_beams)]
        return int(np.argmax(powers))

    def multisection_search(
        self,
        config: ArrayConfig,
        measure: Measure,
        region: Optional[AngularInterval] = None,
        branching: int = 2,
    ) -> SearchResult:
        """
        Locate a single dominant path in logarithmically many measurements.

        The candidate beams are split into `branching` equal chunks, each probed with
        an alternating-sign wide beam; the strongest chunk is kept until one beam a
        remains. base2(a-1) and base2(a) are then measured afresh and the ratio
        model of index a-1, whose interval is the cell of beam a, gives u_hat.
        """
        if branching < 2:
            raise ValidationError(f"branching must be at least 2, got {branching}")
        region = region or AngularInterval.full_circle()
        if region.width < 2 * config.beam_spacing - 1e-12:
            raise ValidationError(
                f"region width {region.width:.4f} is narrower than two beams "
                f"({2 * config.beam_spacing:.4f})"
            )

        N = config.n_beams
        candidates = beam_synthesizer.beams_covering(config, region)
        calls = 0
        while len(candidates) > 1:
            chunks = np.array_split(np.asarray(candidates), min(branching, len(candidates)))
            powers = []
            for chunk in chunks:
                sel = beam_synthesizer.run_selection(config, chunk.tolist())
                powers.append(abs(measure(sel)) ** 2)
                calls += 1
            best = int(np.argmax(powers))
            candidates = chunks[best].tolist()
            logger.debug(f"Search kept chunk {candidates[0]}..{candidates[-1]} ({len(candidates)} beams)")

        final_beam = int(candidates[0])
        n = (final_beam - 1) % N
        x_d = measure(beam_synthesizer.base2_beam(config, n))
        x_e = measure(beam_synthesizer.base2_beam(config, final_beam))
        calls += 2

        obs = Observation(
            samples=np.array([x_d, x_e], dtype=complex),
            snr_db=getattr(measure, "snr_db", math.inf),
        )
        u_hat = self.estimate_aoa(obs, self.build_ratio_model(config, n))
        logger.debug(
            f"Search stopped at beam {final_beam}",
            extra={"calls": calls, "n_beams": N},
        )
        return SearchResult(
            base2_index=n,
            u_hat=wrap_angle(u_hat),
            calls=calls,
            final_beam=final_beam,
        )


aoa_estimator = AoAEstimator()
