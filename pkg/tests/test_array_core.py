import math

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from app.core.exceptions import IndexRangeError, ValidationError
from app.schemas.array import (
    AngularInterval,
    ArrayConfig,
    SelectionVector,
    contiguous_runs,
    wrap_angle,
)
from app.services.array_core import array_engine, default_u_grid


def crossover_db(N: int) -> float:
    return 20 * math.log10(abs(array_engine.beam_gain(ArrayConfig(n_beams=N), 3, 2 * math.pi * 3.5 / N)))


class TestBeamGain:
    def test_peak_is_unit(self, config16):
        for n in range(16):
            u = array_engine.beam_pointing(config16, n)
            assert abs(array_engine.beam_gain(config16, n, u)) == pytest.approx(1.0, abs=1e-12)

    def test_null_steering_exhaustive(self, config16):
        for n in range(16):
            for m in range(16):
                if n == m:
                    continue
                u = array_engine.beam_pointing(config16, m)
                assert abs(array_engine.beam_gain(config16, n, u)) < 1e-9

    @pytest.mark.parametrize("N", [16, 128])
    def test_crossover_loss(self, N):
        assert crossover_db(N) == pytest.approx(-3.92, abs=0.05)
        exact = 1 / (N * math.sin(math.pi / (2 * N)))
        assert 10 ** (crossover_db(N) / 20) == pytest.approx(exact, rel=1e-12)

    @pytest.mark.parametrize("dft_sign", ["negative", "positive"])
    def test_closed_form_matches_inner_product(self, dft_sign):
        config = ArrayConfig(n_beams=16, dft_sign=dft_sign)
        rng = np.random.default_rng(3)
        u = rng.uniform(-math.pi, math.pi, 20)
        grid = array_engine.beam_gain_grid(config, u, 0.95)
        for i, ui in enumerate(u):
            for n in (0, 5, 15):
                assert grid[i, n] == pytest.approx(
                    array_engine.beam_gain(config, n, ui, 0.95), abs=1e-12
                )

    def test_positive_convention_is_conjugate(self):
        neg = ArrayConfig(n_beams=8)
        pos = ArrayConfig(n_beams=8, dft_sign="positive")
        g_neg = array_engine.beam_gain(neg, 2, 0.3)
        g_pos = array_engine.beam_gain(pos, 2, 0.3)
        assert g_pos == pytest.approx(np.conj(g_neg), abs=1e-12)

    def test_beam_index_out_of_range(self, config16):
        with pytest.raises(IndexRangeError):
            array_engine.beam_gain(config16, 16, 0.0)

    @pytest.mark.parametrize("f", [0.0, -0.5, 1.5])
    def test_invalid_frequency(self, config16, f):
        with pytest.raises(ValidationError):
            array_engine.steering_vector(config16, 0.1, f)


class TestDftMatrix:
    def test_weight_matches_matrix(self, config16):
        F = array_engine.dft_matrix(config16)
        assert F[3, 5] == pytest.approx(array_engine.dft_weight(config16, 3, 5), abs=1e-12)
        assert F[3, 5] == pytest.approx(np.exp(-2j * math.pi * 15 / 16), abs=1e-12)

    def test_matrix_is_unitary_up_to_n(self, config16):
        F = array_engine.dft_matrix(config16)
        assert np.allclose(F @ F.conj().T, 16 * np.eye(16))


class TestDirichlet:
    def test_singularities(self):
        assert array_engine.dirichlet(16, 0.0) == pytest.approx(16.0)
        assert array_engine.dirichlet(16, 2 * math.pi) == pytest.approx(-16.0)
        assert array_engine.dirichlet(15, 2 * math.pi) == pytest.approx(15.0)

    def test_regular_value(self):
        phi = 0.3
        expected = math.sin(8 * phi) / math.sin(phi / 2)
        assert array_engine.dirichlet(16, phi) == pytest.approx(expected)

    def test_small_n_rejected(self):
        with pytest.raises(ValidationError):
            array_engine.dirichlet(1, 0.2)


class TestAngleConversion:
    def test_broadside_and_endfire(self):
        assert array_engine.physical_to_beamspace(90.0) == pytest.approx(0.0, abs=1e-12)
        assert array_engine.physical_to_beamspace(0.0) == pytest.approx(math.pi)

    def test_inverse(self):
        u = array_engine.physical_to_beamspace(60.0)
        assert array_engine.beamspace_to_physical(u) == pytest.approx(60.0)

    def test_invisible_region(self):
        assert array_engine.beamspace_to_physical(3.5, spacing=0.5) is None

    def test_angle_out_of_range(self):
        with pytest.raises(ValidationError):
            array_engine.physical_to_beamspace(190.0)

    def test_wrap(self):
        assert wrap_angle(math.pi) == pytest.approx(-math.pi)
        assert wrap_angle(2 * math.pi * 15 / 16) == pytest.approx(-math.pi / 8)


class TestPatternFeatures:
    @pytest.mark.parametrize("N", [16, 64, 128])
    def test_null_width_and_sidelobe(self, N):
        config = ArrayConfig(n_beams=N)
        u = default_u_grid(4096)
        step = u[1] - u[0]
        mag = np.abs(array_engine.beam_gain_grid(config, u)[:, 0])
        features = array_engine.pattern_features(u, mag)
        assert features.peak_u == pytest.approx(0.0, abs=step)
        assert features.first_null_beamwidth == pytest.approx(4 * math.pi / N, abs=step)
        assert features.first_sidelobe_db == pytest.approx(-13.26, abs=0.15)


class TestSamplePattern:
    def test_shape_and_narrowband_slice(self, config16):
        u = default_u_grid(256)
        weights = np.zeros(16)
        weights[4] = 1
        grid = array_engine.sample_pattern(config16, weights, u, (0.9, 1.0))
        assert grid.values.shape == (256, 2)
        assert np.allclose(grid.column(1), array_engine.beam_gain_grid(config16, u)[:, 4])

    def test_weight_length_mismatch(self, config16):
        with pytest.raises(ValidationError):
            array_engine.sample_pattern(config16, np.ones(8), default_u_grid(64))


class TestSelectionVector:
    def test_rejects_bad_weight(self):
        with pytest.raises(PydanticValidationError):
            SelectionVector(weights=(0, 2, 1))

    def test_switch_only_rejects_sign_reversal(self):
        with pytest.raises(PydanticValidationError):
            SelectionVector(weights=(1, -1, 0), hardware="switch-only")
        assert SelectionVector(weights=(1, 1, 0), hardware="switch-only").k == 2

    def test_text_form(self):
        sel = SelectionVector(weights=(0, 1, -1, 0))
        assert sel.to_text() == "0,+1,-1,0"
        assert SelectionVector.from_text("0,+1,-1,0") == sel

    def test_selected_runs(self):
        sel = SelectionVector.from_beams(8, {7: 1, 0: -1, 3: 1})
        assert sel.selected_runs() == [[7, 0], [3]]

    def test_even_power_split(self):
        sel = SelectionVector(weights=(1, -1, 1, 0), normalization="even-power-split")
        assert sel.amplitude == pytest.approx(1 / math.sqrt(3))
        assert np.allclose(sel.applied_weights(), np.array([1, -1, 1, 0]) / math.sqrt(3))


class TestContiguousRuns:
    def test_wrapping_run(self):
        assert contiguous_runs([0, 14, 15], 16) == [[14, 15, 0]]

    def test_separate_runs(self):
        assert contiguous_runs([1, 2, 5], 16) == [[1, 2], [5]]

    def test_full_circle(self):
        assert contiguous_runs(range(8), 8) == [list(range(8))]


class TestAngularInterval:
    def test_wrapping_width_and_contains(self):
        interval = AngularInterval(lo=3.0, hi=-3.0)
        assert interval.width == pytest.approx(2 * math.pi - 6.0)
        assert interval.contains(math.pi)
        assert not interval.contains(0.0)

    def test_overlap_across_seam(self):
        interval = AngularInterval(lo=3.0, hi=-3.0)
        assert interval.overlap(-3.1, 0.2) == pytest.approx(0.1)
