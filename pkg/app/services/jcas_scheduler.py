"""
JCAS Scheduler Service
Type-1 (regular) and Type-2 (random) sensing schedules sharing one RF chain with a comm beam
"""
import math
from typing import Iterable, List, Optional

import numpy as np

from app.core.exceptions import ValidationError
from app.core.logging import logger
from app.schemas.array import ArrayConfig, SelectionVector, contiguous_runs
from app.schemas.jcas import ApgCurve, JcasConfig, JcasSchedule, SecrecyMap, TradeoffRow
from app.services.array_core import array_engine, default_u_grid
from app.services.beam_synthesis import beam_synthesizer

# Differences below this (dB) count as the curves touching
CROSSING_TOL_DB = 1e-9


class JcasScheduler:
    """Build JCAS beam schedules and evaluate their gain statistics"""

    @staticmethod
    def array_config(cfg: JcasConfig) -> ArrayConfig:
        return ArrayConfig(n_beams=cfg.n_beams)

    @staticmethod
    def _selection(cfg: JcasConfig, signs: dict) -> SelectionVector:
        signs = dict(signs)
        signs[cfg.comm_beam] = 1
        return SelectionVector.from_beams(cfg.n_beams, signs, normalization="even-power-split")

    @staticmethod
    def type1_period(cfg: JcasConfig) -> int:
        return cfg.n_beams - 1 if cfg.collision == "skip" else cfg.n_beams

    def type1_window(self, cfg: JcasConfig, t: int) -> List[int]:
        """Sensing beams at time t, in window order."""
        N, x, comm = cfg.n_beams, cfg.n_sensing, cfg.comm_beam

        if cfg.collision == "skip":
            ring = [n for n in range(N) if n != comm]
            # first ring entry at or after the start index
            offset = next(i for i, n in enumerate(ring) if n >= cfg.start) if cfg.start <= ring[-1] else 0
            return [ring[(offset + t + k) % len(ring)] for k in range(x)]

        window = [(cfg.start + t + k) % N for k in range(x)]
        if comm in window:
            j = 1
            while True:
                candidate = (window[-1] + j) % N
                if candidate != comm and candidate not in window:
                    break
                j += 1
            window[window.index(comm)] = candidate
        return window

    def type1_schedule(self, cfg: JcasConfig) -> JcasSchedule:
        if cfg.scheme != "type1":
            raise ValidationError(f"type1_schedule called with scheme={cfg.scheme}")
        selections = []
        for t in range(cfg.time_units):
            sensing = self.type1_window(cfg, t)
            signs = beam_synthesizer.alternating_signs(contiguous_runs(sensing, cfg.n_beams))
            selections.append(self._selection(cfg, signs))
        return JcasSchedule(config=cfg, selections=tuple(selections))

    def type2_schedule(self, cfg: JcasConfig) -> JcasSchedule:
        if cfg.scheme != "type2":
            raise ValidationError(f"type2_schedule called with scheme={cfg.scheme}")
        rng = np.random.default_rng(cfg.rng_seed)
        candidates = np.array([n for n in range(cfg.n_beams) if n != cfg.comm_beam])
        selections = []
        for _ in range(cfg.time_units):
            beams = rng.choice(candidates, size=cfg.n_sensing, replace=False)
            signs = rng.choice(np.array([-1, 1]), size=cfg.n_sensing)
            selections.append(self._selection(
                cfg, {int(b): int(s) for b, s in zip(beams, signs)}
            ))
        return JcasSchedule(config=cfg, selections=tuple(selections))

    def build_schedule(self, cfg: JcasConfig) -> JcasSchedule:
        schedule = self.type1_schedule(cfg) if cfg.scheme == "type1" else self.type2_schedule(cfg)
        logger.info(
            f"Built {cfg.scheme} schedule: x={cfg.n_sensing}, T={cfg.time_units}",
            extra={"n_beams": cfg.n_beams, "seed": cfg.rng_seed},
        )
        return schedule

    @staticmethod
    def _check(schedule: JcasSchedule, config: ArrayConfig) -> None:
        if schedule.time_units == 0:
            raise ValidationError("schedule has no time units")
        if config.n_beams != schedule.config.n_beams:
            raise ValidationError(
                f"schedule has {schedule.config.n_beams} beams, array has {config.n_beams}"
            )

    def average_power_gain(
        self, schedule: JcasSchedule, config: ArrayConfig, u_grid=None
    ) -> ApgCurve:
        """Mean over time units of |combined gain|^2 at each angle."""
        self._check(schedule, config)
        u = default_u_grid() if u_grid is None else np.atleast_1d(np.asarray(u_grid, dtype=float))
        W = schedule.weight_matrix()
        # weights are real: mean |w.g|^2 = g^H R g with R the weight second moment
        R = W.T @ W / schedule.time_units
        G = array_engine.beam_gain_grid(config, u)
        apg = np.real(np.einsum("un,nm,um->u", np.conj(G), R, G))
        return ApgCurve(u_grid=u, apg=np.maximum(apg, 0.0))

    @staticmethod
    def selection_frequency(schedule: JcasSchedule) -> np.ndarray:
        """Fraction of time units in which each beam is selected."""
        return np.mean(schedule.weight_matrix() != 0, axis=0)

    def pointing_apg(self, schedule: JcasSchedule) -> np.ndarray:
        """APG at every DFT pointing from selection counts alone."""
        return self.selection_frequency(schedule) / (schedule.config.n_sensing + 1)

    def tradeoff_curves(
        self,
        base: JcasConfig,
        x_range: Optional[Iterable[int]] = None,
        sensing_probe_u: float = math.pi,
    ) -> List[TradeoffRow]:
        """
        Comm power gain and sensing APG at the probe angle for each sensing count x.

        Type-1 schedules are lengthened to whole cycles so every non-comm beam
        is selected equally often.
        """
        x_values = list(range(2, base.n_beams)) if x_range is None else list(x_range)
        config = self.array_config(base)
        u_comm = float(array_engine.pointings(config)[base.comm_beam])

        rows = []
        for x in x_values:
            if not 1 <= x <= base.n_beams - 1:
                raise ValidationError(f"x={x} outside [1, {base.n_beams - 1}]")
            time_units = base.time_units
            if base.scheme == "type1":
                period = self.type1_period(base)
                time_units = period * math.ceil(time_units / period)
            cfg = JcasConfig(**{
                **base.model_dump(),
                "n_sensing": x,
                "time_units": time_units,
            })
            apg = self.average_power_gain(self.build_schedule(cfg), config, [u_comm, sensing_probe_u]).apg
            rows.append(TradeoffRow(
                x=x,
                comm_gain=float(apg[0]),
                sensing_apg=float(apg[1]),
                comm_db=float(10.0 * np.log10(apg[0])),
                sensing_db=float(10.0 * np.log10(max(apg[1], 1e-30))),
            ))
        return rows

    @staticmethod
    def count_crossings(rows: List[TradeoffRow], tol_db: float = CROSSING_TOL_DB) -> int:
        """Sign changes of comm_db - sensing_db; a touch within tol_db counts once."""
        crossings = 0
        previous = 0
        for row in rows:
            diff = row.comm_db - row.sensing_db
            sign = 0 if abs(diff) < tol_db else int(np.sign(diff))
            if sign == 0:
                if previous != 0:
                    crossings += 1
            elif previous != 0 and sign != previous:
                crossings += 1
            previous = sign
        return crossings

    def secrecy_map(
        self, schedule: JcasSchedule, config: ArrayConfig, u_grid=None
    ) -> SecrecyMap:
        """Complex gain per (time unit, angle) and its temporal statistics per angle."""
        self._check(schedule, config)
        u = default_u_grid() if u_grid is None else np.atleast_1d(np.asarray(u_grid, dtype=float))
        gains = schedule.weight_matrix() @ array_engine.beam_gain_grid(config, u).T
        amp = np.abs(gains)
        phasor = np.mean(np.exp(1j * np.angle(gains)), axis=0)
        resultant = np.clip(np.abs(phasor), 1e-300, 1.0)
        return SecrecyMap(
            u_grid=u,
            gains=gains,
            amp_mean=amp.mean(axis=0),
            amp_std=amp.std(axis=0),
            phase_mean=np.angle(phasor),
            phase_std=np.sqrt(-2.0 * np.log(resultant)),
        )


jcas_scheduler = JcasScheduler()
