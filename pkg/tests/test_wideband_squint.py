import math

import numpy as np
import pytest

from app.core.exceptions import ValidationError
from app.schemas.array import SelectionVector
from app.schemas.squint import FrequencyBand, FrequencyProfile, RegionLabel
from app.services.array_core import array_engine, circle_u_grid
from app.services.wideband_squint import squint_analyzer


def gain_db(grid) -> np.ndarray:
    return 20 * np.log10(np.maximum(grid.magnitude(), 1e-15))


def synthetic_profile(levels_db) -> FrequencyProfile:
    levels = np.asarray(levels_db, dtype=float)
    return FrequencyProfile(
        frequencies=np.linspace(0.9, 1.0, levels.size),
        powers=10 ** (levels / 20),
    )


@pytest.fixture
def map_peak(config128, squint_selection, squint_band):
    grid = squint_analyzer.wideband_gain_map(config128, squint_selection, squint_band, circle_u_grid(2048))
    return float(grid.magnitude().max())


class TestShiftLaw:
    @pytest.mark.parametrize("n, rho, expected", [(64, 0.9, 71), (115, 0.9, 128), (0, 0.5, 0), (20, 0.7, 29)])
    def test_rounding(self, n, rho, expected):
        assert squint_analyzer.shifted_beam_index(n, rho) == expected

    @pytest.mark.parametrize("rho", [0.0, 1.0, 1.2])
    def test_rho_range(self, rho):
        with pytest.raises(ValidationError):
            squint_analyzer.shifted_beam_index(3, rho)

    def test_negative_beam(self):
        with pytest.raises(ValidationError):
            squint_analyzer.shifted_beam_index(-1, 0.9)

    def test_peaks_follow_the_law(self, config128):
        u = circle_u_grid(8192)
        spacing = 2 * math.pi / 128
        for n in range(64, 116, 3):
            grid = squint_analyzer.wideband_gain_map(
                config128, SelectionVector.one_hot(128, n), FrequencyBand(rho=0.9, n_points=8), u
            )
            peak = u[int(np.argmax(grid.magnitude()[:, 0]))]
            shifted = squint_analyzer.shifted_beam_index(n, 0.9)
            assert abs(peak - 2 * math.pi * shifted / 128) <= spacing / 2 + (u[1] - u[0])


class TestWidebandGainMap:
    def test_narrowband_limit(self, config128, squint_selection, squint_band):
        u = circle_u_grid(512)
        grid = squint_analyzer.wideband_gain_map(config128, squint_selection, squint_band, u)
        narrow = array_engine.sample_pattern(config128, squint_selection.applied_weights(), u, (1.0,))
        assert np.allclose(grid.values[:, -1], narrow.column(0), atol=1e-12)

    def test_broadside_beam_does_not_squint(self, config128, squint_band):
        u = circle_u_grid(1024)
        grid = squint_analyzer.wideband_gain_map(config128, SelectionVector.one_hot(128, 0), squint_band, u)
        assert np.all(np.argmax(grid.magnitude(), axis=0) == 0)

    def test_profile_peaks_at_design_frequency(self, config128, squint_band):
        sel = SelectionVector.one_hot(128, 32)
        u = array_engine.beam_pointing(config128, 32)
        profile = squint_analyzer.frequency_profile(config128, sel, squint_band, u)
        assert profile.powers[-1] == pytest.approx(1.0, abs=1e-9)
        assert np.all(profile.powers <= 1.0 + 1e-9)
        assert profile.powers[0] < 0.5

    def test_mismatched_selection(self, config128, squint_band):
        with pytest.raises(ValidationError):
            squint_analyzer.wideband_gain_map(config128, SelectionVector.one_hot(16, 0), squint_band)


class TestSquintCompensation:
    def test_selection_for_beam_71(self, config128, squint_band):
        sel = squint_analyzer.squint_compensated_selection(config128, 71, squint_band)
        assert sel.support == list(range(64, 72))
        assert sel.weights[64] == 1

    def test_covers_target_across_band(self, config128, squint_band):
        u71 = [2 * math.pi * 71 / 128]
        compensated = squint_analyzer.squint_compensated_selection(config128, 71, squint_band)
        wide = gain_db(squint_analyzer.wideband_gain_map(config128, compensated, squint_band, u71))
        single = gain_db(squint_analyzer.wideband_gain_map(config128, SelectionVector.one_hot(128, 71), squint_band, u71))
        assert wide.min() >= -3.92
        assert single[0, 0] < -13.0

    def test_dominates_single_beam(self, config128, squint_band):
        for x in (66, 80, 100, 120):
            u = [2 * math.pi * x / 128]
            compensated = squint_analyzer.squint_compensated_selection(config128, x, squint_band)
            wide = gain_db(squint_analyzer.wideband_gain_map(config128, compensated, squint_band, u))
            single = gain_db(squint_analyzer.wideband_gain_map(config128, SelectionVector.one_hot(128, x), squint_band, u))
            assert wide.min() >= single.min()

    def test_narrow_band_degenerates_to_one_beam(self, config128):
        sel = squint_analyzer.squint_compensated_selection(config128, 71, FrequencyBand(rho=0.999))
        assert sel == SelectionVector.one_hot(128, 71)

    def test_target_outside_index_space(self, config128, squint_band):
        with pytest.raises(ValidationError, match="closest valid selection"):
            squint_analyzer.squint_compensated_selection(config128, 130, squint_band)


class TestClassifyRegion:
    @pytest.mark.parametrize(
        "levels, label",
        [
            ([0, 0, -1, -2, -1, 0, 0, -1], RegionLabel.R3),
            ([-30] * 8, RegionLabel.R1),
            ([-30, -25, -20, -15, -10, -5, -2, 0], RegionLabel.R2),
            ([0, -2, -5, -10, -15, -20, -25, -30], RegionLabel.R4),
            ([-20, -18, -15, -13, -11, -10, -9, -8], RegionLabel.R2),
            ([-8, -9, -10, -11, -13, -15, -18, -20], RegionLabel.R4),
        ],
    )
    def test_labels(self, levels, label):
        decision = squint_analyzer.classify_region(synthetic_profile(levels))
        assert decision.label == label
        assert not decision.flagged

    def test_interior_bump_is_flagged(self):
        decision = squint_analyzer.classify_region(synthetic_profile([-20, -15, -3, -2, -10, -9, -8, -7]))
        assert decision.flagged
        assert decision.label == RegionLabel.R4

    def test_split_high_set_is_flagged(self):
        decision = squint_analyzer.classify_region(synthetic_profile([-20, -3, -15, -14, -10, -9, -2, 0]))
        assert decision.label == RegionLabel.R2
        assert decision.flagged

    def test_thresholds_must_be_ordered(self):
        with pytest.raises(ValidationError):
            squint_analyzer.classify_region(synthetic_profile([0] * 8), high_thresh_db=-12, low_thresh_db=-6)

    def test_reference_beams(self, config128, squint_selection, squint_band, map_peak):
        refs = squint_analyzer.reference_profiles(
            config128, squint_selection, squint_band, [40, 68, 80, 123], map_peak
        )
        labels = {n: squint_analyzer.classify_region(p).label for n, p in refs.items()}
        assert labels == {40: RegionLabel.R1, 68: RegionLabel.R2, 80: RegionLabel.R3, 123: RegionLabel.R4}


class TestMatchBeamByProfile:
    def test_self_match_in_shifting_regions(self, config128, squint_selection, squint_band, map_peak):
        beams = list(range(128))
        refs = squint_analyzer.reference_profiles(config128, squint_selection, squint_band, beams, map_peak)
        shifting = [
            n for n in beams
            if squint_analyzer.classify_region(refs[n]).label in (RegionLabel.R2, RegionLabel.R4)
        ]
        assert {68, 123} <= set(shifting)
        assert len(shifting) >= 10
        for n in shifting:
            match = squint_analyzer.match_beam_by_profile(refs[n], refs)
            assert match.beam == n
            assert match.residual == pytest.approx(0.0, abs=1e-20)

    def test_scaled_profile_matches(self, config128, squint_selection, squint_band):
        refs = squint_analyzer.reference_profiles(config128, squint_selection, squint_band, [68, 123])
        observed = FrequencyProfile(frequencies=refs[123].frequencies, powers=refs[123].powers * 0.2)
        assert squint_analyzer.match_beam_by_profile(observed, refs).beam == 123

    def test_empty_references(self):
        with pytest.raises(ValidationError):
            squint_analyzer.match_beam_by_profile(synthetic_profile([0] * 8), {})

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            squint_analyzer.match_beam_by_profile(synthetic_profile([0] * 8), {3: synthetic_profile([0] * 9)})


class TestRegionSweep:
    def test_four_regions_in_order(self, config128, squint_selection, squint_band):
        runs = squint_analyzer.region_sweep(config128, squint_selection, squint_band, circle_u_grid(2048))
        assert [run.label for run in runs] == [RegionLabel.R1, RegionLabel.R2, RegionLabel.R3, RegionLabel.R4]
        assert sum(run.count for run in runs) == 2048

    def test_wrapping_run_is_merged(self, config128, squint_band):
        runs = squint_analyzer.region_sweep(
            config128, SelectionVector.one_hot(128, 64), squint_band, circle_u_grid(1024)
        )
        assert runs[0].label == RegionLabel.R1
        assert runs[0].u_start < 0
        assert runs[-1].label != RegionLabel.R1
        assert sum(run.count for run in runs) == 1024
