"""
Experiment Runner
Resolves experiment parameters, runs the matching simulation and writes its CSV files
"""
import math
import time
from typing import Any, Callable, Dict, List

import numpy as np

from app.core.config import settings
from app.core.exceptions import ValidationError
from app.core.logging import logger
from app.schemas.aoa import IncidentPath, PathSet
from app.schemas.array import AngularInterval, ArrayConfig, circular_distance, wrap_angle
from app.schemas.experiment import ExperimentOutcome, ExperimentSpec
from app.schemas.jcas import JcasConfig
from app.schemas.power import PowerParams
from app.services.aoa_estimator import MeasurementOracle, aoa_estimator
from app.services.array_core import array_engine, circle_u_grid, default_u_grid
from app.services.beam_synthesis import beam_synthesizer
from app.services.csv_export import csv_exporter
from app.services.index_modulation import bh_modem
from app.services.jcas_scheduler import jcas_scheduler
from app.services.power_model import power_model
from app.services.wideband_squint import squint_analyzer

SNR_SWEEP = "0,5,10,15,20,25,30"

# Flag names that mean something else for a given experiment
ALIASES: Dict[str, Dict[str, str]] = {
    "aoa": {"snr_db": "snr_list"},
    "bh": {"snr_db": "snr_list"},
    "power": {"n_beams": "n_antennas"},
}


def parse_list(text: str, cast: Callable = float, sep: str = ",") -> List:
    try:
        return [cast(token.strip()) for token in str(text).split(sep) if token.strip()]
    except ValueError as e:
        raise ValidationError(f"cannot parse list '{text}': {e}") from e


def parse_gain(token: str) -> complex:
    """'0.8@0.7' is magnitude 0.8 at phase 0.7 rad; a bare number is real."""
    magnitude, _, phase = token.partition("@")
    return float(magnitude) * complex(math.cos(float(phase or 0)), math.sin(float(phase or 0)))


def to_db(value) -> np.ndarray:
    """Amplitude in dB, floored at -300 dB."""
    return 20.0 * np.log10(np.maximum(np.abs(value), 1e-15))


class ExperimentRunner:
    """Runs one CLI subcommand; every output depends only on (subcommand, parameters, seed)"""

    def __init__(self):
        self._runners: Dict[str, Callable[[Dict[str, Any], ExperimentSpec], ExperimentOutcome]] = {
            "pattern": self.run_pattern,
            "synthesize": self.run_synthesize,
            "aoa": self.run_aoa,
            "search": self.run_search,
            "squint": self.run_squint,
            "jcas-apg": self.run_jcas_apg,
            "jcas-tradeoff": self.run_jcas_tradeoff,
            "jcas-secrecy": self.run_jcas_secrecy,
            "bh": self.run_bh,
            "power": self.run_power,
        }

    @staticmethod
    def defaults(subcommand: str) -> Dict[str, Any]:
        points = settings.ANGLE_GRID_POINTS
        table: Dict[str, Dict[str, Any]] = {
            "pattern": {"n_beams": 16, "points": points},
            "synthesize": {
                "n_beams": 16,
                "target_beams": "1:4;12:13",
                "normalization": "unit",
                "points": points,
            },
            "aoa": {
                "n_beams": 16,
                "beam": 0,
                "snr_list": SNR_SWEEP,
                "trials": 10000,
                "grid_size": settings.RATIO_GRID_POINTS,
            },
            "search": {"n_beams": 128, "branching": 2, "snr_db": math.inf, "trials": 200},
            "squint": {
                "n_beams": 128,
                "rho": 0.9,
                "first_beam": 64,
                "last_beam": 115,
                "freq_points": settings.FREQ_GRID_POINTS,
                "points": 2048,
                "profile_beams": "40,68,80,123",
            },
            "jcas-apg": {
                "n_beams": 16,
                "comm_beam": 0,
                "x_sensing": 4,
                "time_units": 1000,
                "collision": "skip",
                "points": 1024,
            },
            "jcas-tradeoff": {
                "n_beams": 16,
                "comm_beam": 0,
                "time_units": 1000,
                "scheme": "type1",
                "collision": "skip",
                "x_min": 2,
                "x_max": 15,
                "probe_u": math.pi,
            },
            "jcas-secrecy": {
                "n_beams": 16,
                "comm_beam": 0,
                "x_sensing": 4,
                "time_units": 50,
                "scheme": "type2",
                "collision": "skip",
                "points": 256,
            },
            "bh": {
                "n_beams": 16,
                "path_beams": "2,6,11",
                "path_gains": "1,0.8@0.7,0.6@-1.9",
                "bits": 2,
                "snr_list": SNR_SWEEP,
                "symbols": 10000,
            },
            "power": PowerParams().model_dump(),
        }
        return table[subcommand]

    @staticmethod
    def _coerce(key: str, value: Any, default: Any) -> Any:
        try:
            if isinstance(default, int):
                number = float(value)
                if not number.is_integer():
                    raise ValueError("expected an integer")
                return int(number)
            if isinstance(default, float):
                return float(value)
            return str(value)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"invalid value for {key}: {value!r} ({e})") from e

    def resolve(self, spec: ExperimentSpec) -> Dict[str, Any]:
        """Defaults overridden by the run's parameters, coerced to the default's type."""
        defaults = self.defaults(spec.subcommand)
        aliases = ALIASES.get(spec.subcommand, {})
        resolved = dict(defaults)
        for raw_key, value in spec.parameters.items():
            key = raw_key.replace("-", "_")
            key = aliases.get(key, key)
            if key not in defaults:
                raise ValidationError(
                    f"unknown parameter '{raw_key}' for {spec.subcommand}; "
                    f"expected one of {', '.join(sorted(defaults))}"
                )
            resolved[key] = self._coerce(key, value, defaults[key])
        return resolved

    def run(self, spec: ExperimentSpec) -> ExperimentOutcome:
        params = self.resolve(spec)
        start = time.perf_counter()
        outcome = self._runners[spec.subcommand](params, spec)
        logger.info(
            f"Experiment {spec.subcommand} wrote {len(outcome.files)} file(s)",
            extra={
                "experiment": spec.subcommand,
                "seed": spec.seed,
                "duration_ms": round((time.perf_counter() - start) * 1000, 1),
            },
        )
        return outcome

    @staticmethod
    def header(spec: ExperimentSpec, params: Dict[str, Any], **extra) -> Dict[str, Any]:
        return {
            "subcommand": spec.subcommand,
            "seed": spec.seed,
            "version": settings.VERSION,
            **params,
            **extra,
        }

    # single DFT beam patterns
    def run_pattern(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        u = default_u_grid(params["points"])
        gains = array_engine.beam_gain_grid(config, u)
        N = config.n_beams

        main = csv_exporter.write(
            spec.out,
            self.header(spec, params),
            ["u_rad"] + [f"beam_{n}_db" for n in range(N)],
            ([u[i]] + list(to_db(gains[i])) for i in range(u.size)),
        )

        rows = []
        for n in range(N):
            features = array_engine.pattern_features(u, np.abs(gains[:, n]))
            crossover = array_engine.beam_gain(
                config, n, beam_synthesizer.base2_pointing(config, n)
            )
            rows.append([
                n,
                features.peak_u,
                features.first_null_beamwidth,
                features.first_sidelobe_db,
                float(to_db(crossover)),
            ])
        features_file = csv_exporter.write(
            csv_exporter.sibling(spec.out, "features"),
            self.header(spec, params),
            ["beam", "peak_u_rad", "first_null_beamwidth_rad", "first_sidelobe_db", "crossover_db"],
            rows,
        )
        return ExperimentOutcome(files=[main, features_file])

    @staticmethod
    def target_intervals(text: str, n_beams: int) -> List[AngularInterval]:
        """'1:4;12:13' spans pointings u_1..u_4 and u_12..u_13; 'a:a' is half a cell around u_a."""
        step = 2.0 * math.pi / n_beams
        targets = []
        for chunk in parse_list(text, str, sep=";"):
            first, _, last = chunk.partition(":")
            a, b = float(first), float(last or first)
            if a == b:
                lo, hi = a * step - step / 4, a * step + step / 4
            else:
                lo, hi = a * step, b * step
            targets.append(AngularInterval(lo=wrap_angle(lo), hi=wrap_angle(hi)))
        return targets

    # synthesized beam with non-contiguous flat mainlobes
    def run_synthesize(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        targets = self.target_intervals(params["target_beams"], config.n_beams)
        sel = beam_synthesizer.synthesize_mainlobes(config, targets, params["normalization"])
        u = default_u_grid(params["points"])
        gain_db = beam_synthesizer.pattern_db(config, sel, u)

        extra: Dict[str, Any] = {"selection": sel.to_text()}
        for i, target in enumerate(targets):
            if target.width > 2 * 2 * math.pi / config.n_beams:
                low, high = beam_synthesizer.mainlobe_ripple(config, sel, target)
                extra[f"ripple_{i}_db"] = f"{low:.4f}..{high:.4f}"

        main = csv_exporter.write(
            spec.out,
            self.header(spec, params, **extra),
            ["u_rad", "gain_db"],
            zip(u, gain_db),
        )
        return ExperimentOutcome(files=[main])

    # base-2 beams, delta/sigma ratio curve and estimator RMSE
    def run_aoa(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        n = params["beam"]
        model = aoa_estimator.build_ratio_model(config, n, params["grid_size"])
        beam_d = beam_synthesizer.base2_beam(config, n)
        beam_e = beam_synthesizer.base2_beam(config, (n + 1) % config.n_beams)
        u = model.u_table

        main = csv_exporter.write(
            spec.out,
            self.header(spec, params),
            ["u_rad", "gain_d_db", "gain_e_db", "ratio"],
            zip(
                u,
                to_db(beam_synthesizer.combined_gain_grid(config, beam_d, u)),
                to_db(beam_synthesizer.combined_gain_grid(config, beam_e, u)),
                model.f_table,
            ),
        )

        rows = aoa_estimator.rmse_sweep(
            config, n, parse_list(params["snr_list"]), params["trials"], spec.seed, params["grid_size"]
        )
        rmse = csv_exporter.write(
            csv_exporter.sibling(spec.out, "rmse"),
            self.header(spec, params),
            ["snr_db", "trials", "rmse_rad", "bias_rad"],
            ([r.snr_db, r.trials, r.rmse_rad, r.bias_rad] for r in rows),
        )
        return ExperimentOutcome(files=[main, rmse])

    # Multi-section search against the exhaustive scan
    def run_search(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        rng = np.random.default_rng(spec.seed)
        angles = rng.uniform(-math.pi, math.pi, params["trials"])

        rows = []
        for trial, u in enumerate(angles):
            scene = PathSet.single(float(u))
            oracle = MeasurementOracle(config, scene, params["snr_db"], seed=(spec.seed, trial, 0))
            result = aoa_estimator.multisection_search(config, oracle, branching=params["branching"])
            scan = MeasurementOracle(config, scene, params["snr_db"], seed=(spec.seed, trial, 1))
            reference = aoa_estimator.exhaustive_scan(config, scan)
            rows.append([
                trial,
                float(u),
                result.u_hat,
                float(circular_distance(result.u_hat, u)),
                result.base2_index,
                result.final_beam,
                reference,
                result.calls,
                int(result.final_beam == reference),
            ])

        agreement = sum(row[-1] for row in rows) / len(rows)
        main = csv_exporter.write(
            spec.out,
            self.header(
                spec, params,
                agreement=agreement,
                max_calls=max(row[7] for row in rows),
            ),
            ["trial", "u_true", "u_hat", "error_rad", "base2_index", "final_beam",
             "exhaustive_beam", "calls", "agree"],
            rows,
        )
        return ExperimentOutcome(files=[main], summary=f"agreement with exhaustive scan: {agreement:.3f}")

    # wideband gain map, regions and frequency profiles
    def run_squint(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        band = squint_analyzer.band(params["rho"], params["freq_points"])
        sel = beam_synthesizer.run_selection(
            config, list(range(params["first_beam"], params["last_beam"] + 1))
        )
        u = circle_u_grid(params["points"])
        grid = squint_analyzer.wideband_gain_map(config, sel, band, u)
        magnitude = grid.magnitude()
        header = self.header(spec, params, selection=sel.to_text())

        files = [csv_exporter.write_matrix(
            spec.out, header, "u_rad\\f_norm", grid.u_grid, grid.f_grid, magnitude
        )]

        runs = squint_analyzer.region_sweep(config, sel, band, u)
        files.append(csv_exporter.write(
            csv_exporter.sibling(spec.out, "regions"),
            header,
            ["region", "u_start_rad", "u_stop_rad", "count"],
            ([r.label, r.u_start, r.u_stop, r.count] for r in runs),
        ))

        peak = float(magnitude.max())
        references = squint_analyzer.reference_profiles(config, sel, band, range(config.n_beams), peak)
        rows = []
        for beam in parse_list(params["profile_beams"], int):
            array_engine.check_beam(config, beam)
            profile = references[beam]
            decision = squint_analyzer.classify_region(profile)
            match = squint_analyzer.match_beam_by_profile(profile, references)
            rows.append([beam, decision.label, decision.flagged, match.beam, match.residual])
        files.append(csv_exporter.write(
            csv_exporter.sibling(spec.out, "profiles"),
            header,
            ["beam", "region", "flagged", "matched_beam", "residual"],
            rows,
        ))
        return ExperimentOutcome(files=files)

    @staticmethod
    def jcas_config(params: Dict[str, Any], seed: int, **overrides) -> JcasConfig:
        values = {
            "n_beams": params["n_beams"],
            "comm_beam": params["comm_beam"],
            "n_sensing": params.get("x_sensing", params.get("x_min")),
            "scheme": params.get("scheme", "type1"),
            "time_units": params["time_units"],
            "rng_seed": seed,
            "collision": params["collision"],
        }
        values.update(overrides)
        return JcasConfig(**values)

    # average power gain of Type-1 and Type-2 JCAS beams
    def run_jcas_apg(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        u = default_u_grid(params["points"])
        pointings = array_engine.pointings(config)

        files = []
        for scheme in ("type1", "type2"):
            cfg = self.jcas_config(params, spec.seed, scheme=scheme)
            schedule = jcas_scheduler.build_schedule(cfg)
            curve = jcas_scheduler.average_power_gain(schedule, config, u)
            at_pointings = jcas_scheduler.average_power_gain(schedule, config, pointings).apg
            oracle_error = float(np.max(np.abs(at_pointings - jcas_scheduler.pointing_apg(schedule))))
            files.append(csv_exporter.write(
                csv_exporter.sibling(spec.out, scheme),
                self.header(spec, params, scheme=scheme, max_oracle_error=oracle_error),
                ["u_rad", "apg_db"],
                zip(curve.u_grid, curve.db()),
            ))
        return ExperimentOutcome(files=files)

    # comm/sensing power trade-off against the number of sensing beams
    def run_jcas_tradeoff(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        base = self.jcas_config(params, spec.seed)
        rows = jcas_scheduler.tradeoff_curves(
            base, range(params["x_min"], params["x_max"] + 1), params["probe_u"]
        )
        crossings = jcas_scheduler.count_crossings(rows)
        main = csv_exporter.write(
            spec.out,
            self.header(spec, params, crossings=crossings),
            ["x", "comm_gain", "sensing_apg", "comm_db", "sensing_db"],
            ([r.x, r.comm_gain, r.sensing_apg, r.comm_db, r.sensing_db] for r in rows),
        )
        return ExperimentOutcome(files=[main], summary=f"crossings: {crossings}")

    # gain scrambling over time outside the comm direction
    def run_jcas_secrecy(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        schedule = jcas_scheduler.build_schedule(self.jcas_config(params, spec.seed))
        smap = jcas_scheduler.secrecy_map(schedule, config, default_u_grid(params["points"]))
        header = self.header(spec, params)
        t = np.arange(schedule.time_units)

        files = [
            csv_exporter.write_matrix(spec.out, header, "t\\u_rad", t, smap.u_grid, np.abs(smap.gains)),
            csv_exporter.write_matrix(
                csv_exporter.sibling(spec.out, "phase"), header, "t\\u_rad", t, smap.u_grid,
                np.angle(smap.gains),
            ),
            csv_exporter.write(
                csv_exporter.sibling(spec.out, "stats"),
                header,
                ["u_rad", "amp_mean", "amp_std", "phase_mean", "phase_std"],
                zip(smap.u_grid, smap.amp_mean, smap.amp_std, smap.phase_mean, smap.phase_std),
            ),
        ]
        return ExperimentOutcome(files=files)

    # Beam hopping: codebook and BER against SNR
    def run_bh(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        config = ArrayConfig(n_beams=params["n_beams"])
        beams = parse_list(params["path_beams"], int)
        gains = parse_list(params["path_gains"], parse_gain)
        if len(beams) != len(gains):
            raise ValidationError(f"{len(beams)} path beams but {len(gains)} path gains")
        for beam in beams:
            array_engine.check_beam(config, beam)

        scene = PathSet(paths=tuple(
            IncidentPath(u=array_engine.beam_pointing(config, b), amplitude=g)
            for b, g in zip(beams, gains)
        ))
        channel = bh_modem.channel_from_paths(config, beams, scene)
        codebook = bh_modem.select_codebook(bh_modem.enumerate_subsets(beams), channel, params["bits"])
        points = bh_modem.constellation(codebook, channel)
        header = self.header(spec, params, min_distance=bh_modem.min_distance(points))

        rows = bh_modem.ber_sweep(
            codebook, channel, parse_list(params["snr_list"]), params["symbols"], spec.seed
        )
        files = [csv_exporter.write(
            spec.out,
            header,
            ["snr_db", "symbols", "bit_errors", "ber"],
            ([r.snr_db, r.symbols, r.bit_errors, r.ber] for r in rows),
        )]
        bits = codebook.bits_per_symbol
        files.append(csv_exporter.write(
            csv_exporter.sibling(spec.out, "codebook"),
            header,
            ["word", "bits", "subset", "re", "im"],
            (
                [w, format(w, f"0{bits}b") if bits else "-", "+".join(map(str, s)), p.real, p.imag]
                for w, (s, p) in enumerate(zip(codebook.subsets, points))
            ),
        ))
        return ExperimentOutcome(files=files)

    # Analog beamforming power of MBAA vs a PS-aided array
    def run_power(self, params: Dict[str, Any], spec: ExperimentSpec) -> ExperimentOutcome:
        report = power_model.architecture_totals(PowerParams(**params))
        table = [
            ("mbaa", report.mbaa_mw),
            ("phased_array", report.phased_array_mw),
            ("switch_only", report.switch_only_mw),
            ("delta", report.delta_mw),
        ]
        main = csv_exporter.write(spec.out, self.header(spec, params), ["architecture", "power_mw"], table)

        width = max(len(name) for name, _ in table)
        lines = [f"{'architecture':<{width}}  power (mW)"]
        lines += [f"{name:<{width}}  {value:.1f}" for name, value in table]
        return ExperimentOutcome(files=[main], summary="\n".join(lines))


experiment_runner = ExperimentRunner()
