"""
Command-line front end: one subcommand per reproduced result, CSV out.
"""
import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

from pydantic import ValidationError as PydanticValidationError

from app.core.config import settings
from app.core.exceptions import AppException, ValidationError, from_pydantic, handle_exception
from app.core.logging import logger, setup_logging
from app.schemas.experiment import ExperimentSpec
from app.services.experiments import experiment_runner

SUBCOMMANDS: Dict[str, str] = {
    "pattern": "Single DFT beam patterns, crossover loss, first null and first sidelobe.",
    "synthesize": "Wide beam with two non-contiguous flat mainlobes built from selected DFT beams.",
    "aoa": "Base-2 wide beams, their delta/sigma ratio curve and the AoA RMSE against SNR.",
    "search": "Multi-section spatial search for a single path, checked against an exhaustive scan.",
    "squint": "Wideband gain map of a synthesized beam, the four AoA regions and frequency profiles.",
    "jcas-apg": "Average power gain of Type-1 (regular) and Type-2 (random) JCAS beams.",
    "jcas-tradeoff": "Comm and sensing power gain as the number of sensing beams grows.",
    "jcas-secrecy": "Gain amplitude and phase per time unit for a randomized JCAS beam.",
    "bh": "Beam-hopping codebook over multipath-covering beams and its BER against SNR.",
    "power": "Analog beamforming power of an MBAA versus a phase-shifter-aided array.",
}

# Published result each subcommand regenerates, shown as the --help epilog
REPRODUCES: Dict[str, str] = {
    "pattern": "DFT beam pattern properties: unit peak, nulls at other pointings, -3.9 dB crossover",
    "synthesize": "two-mainlobe wide beam pattern over beamspace angle",
    "aoa": "base-2 beam patterns, ratio curve and AoA RMSE versus SNR",
    "search": "multi-section search call count against the N-call exhaustive scan",
    "squint": "gain versus angle and frequency map with the four AoA regions",
    "jcas-apg": "average power gain of Type-1 and Type-2 JCAS beams",
    "jcas-tradeoff": "comm/sensing power-gain trade-off against the number of sensing beams",
    "jcas-secrecy": "per-time-unit gain amplitude and phase of a randomized JCAS beam",
    "bh": "beam-hopping modulation codebook and BER versus SNR",
    "power": "analog power saving of an MBAA over a multi-bit phased array",
}

# Flag destinations forwarded as experiment parameters
PARAMETER_FLAGS = (
    "n_beams", "rho", "comm_beam", "x_sensing", "time_units", "snr_db", "branching",
)


def seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key=value experiment file")
    common.add_argument("--seed", type=seed_value, help=f"random seed (default {settings.DEFAULT_SEED})")
    common.add_argument("--out", type=Path, help="output CSV path (default results/<subcommand>.csv)")
    common.add_argument("--debug", action="store_true", help="human-readable DEBUG logging")
    common.add_argument("--n-beams", type=int, help="number of DFT beams N")
    common.add_argument("--rho", type=float, help="lowest normalized frequency")
    common.add_argument("--comm-beam", type=int, help="communication beam index")
    common.add_argument("--x-sensing", type=int, help="number of sensing beams x")
    common.add_argument("--time-units", type=int, help="number of time units T")
    common.add_argument("--snr-db", type=float, help="SNR in dB (inf for noiseless)")
    common.add_argument("--branching", type=int, help="sub-intervals per search level")

    parser = argparse.ArgumentParser(
        prog="mbaa",
        description=f"{settings.APP_NAME} {settings.VERSION}: figure-reproducing experiments",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")
    for name, text in SUBCOMMANDS.items():
        subparsers.add_parser(
            name, parents=[common], help=text, description=text,
            epilog=f"reproduces: {REPRODUCES[name]}",
        )
    return parser


def load_config_file(path: Path) -> Dict[str, str]:
    """Flat key=value pairs; '#' starts a comment, dashes in keys become underscores."""
    values: Dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ValidationError(f"{path}:{number}: expected key=value, got '{line}'")
            values[key.strip().replace("-", "_")] = value.strip()
    return values


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    """Flags override the config file, which overrides settings defaults."""
    parameters: Dict[str, object] = load_config_file(args.config) if args.config else {}
    seed = parameters.pop("seed", None)
    out = parameters.pop("out", None)

    for name in PARAMETER_FLAGS:
        value = getattr(args, name)
        if value is not None:
            parameters[name] = value

    if args.seed is not None:
        seed = args.seed
    if args.out is not None:
        out = args.out
    try:
        seed = settings.DEFAULT_SEED if seed is None else seed_value(str(seed))
    except (ValueError, argparse.ArgumentTypeError) as e:
        raise ValidationError(f"invalid seed: {e}") from e

    return ExperimentSpec(
        subcommand=args.subcommand,
        parameters=parameters,
        seed=seed,
        out=Path(out) if out else Path("results") / f"{args.subcommand}.csv",
    )


def diagnostic(exc: Exception) -> str:
    if isinstance(exc, AppException):
        return exc.message
    if isinstance(exc, PydanticValidationError):
        return from_pydantic(exc).message
    return str(exc) or exc.__class__.__name__


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 after --help
        return int(e.code or 0)

    setup_logging(debug=args.debug or settings.DEBUG, log_file=settings.LOG_FILE)
    try:
        outcome = experiment_runner.run(build_spec(args))
    except Exception as e:
        code = handle_exception(e)
        print(f"error: {diagnostic(e)}", file=sys.stderr)
        return code

    if outcome.summary:
        print(outcome.summary)
    for path in outcome.files:
        logger.debug(f"Output: {path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
