import math

import pytest

from app.schemas.array import AngularInterval, ArrayConfig, wrap_angle
from app.schemas.jcas import JcasConfig
from app.schemas.squint import FrequencyBand
from app.services.beam_synthesis import beam_synthesizer


def beam_u(n: int, n_beams: int) -> float:
    """Unwrapped pointing of beam n."""
    return 2 * math.pi * n / n_beams


@pytest.fixture
def config16():
    return ArrayConfig(n_beams=16)


@pytest.fixture
def config128():
    return ArrayConfig(n_beams=128)


@pytest.fixture
def two_lobe_targets():
    """Pointings 1..4 and 12..13 of a 16-beam array."""
    return [
        AngularInterval(lo=beam_u(1, 16), hi=beam_u(4, 16)),
        AngularInterval(lo=wrap_angle(beam_u(12, 16)), hi=wrap_angle(beam_u(13, 16))),
    ]


@pytest.fixture
def two_lobe_selection(config16, two_lobe_targets):
    return beam_synthesizer.synthesize_mainlobes(config16, two_lobe_targets)


@pytest.fixture
def squint_band():
    return FrequencyBand(rho=0.9, n_points=64)


@pytest.fixture
def squint_selection(config128):
    return beam_synthesizer.run_selection(config128, list(range(64, 116)))


@pytest.fixture
def jcas_type1():
    return JcasConfig(n_beams=16, comm_beam=0, n_sensing=4, scheme="type1", time_units=1000)


@pytest.fixture
def jcas_type2():
    return JcasConfig(
        n_beams=16, comm_beam=0, n_sensing=4, scheme="type2", time_units=1000, rng_seed=7
    )


@pytest.fixture
def out_dir(tmp_path):
    path = tmp_path / "results"
    path.mkdir()
    return path
