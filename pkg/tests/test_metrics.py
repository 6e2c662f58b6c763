"""Metric tests: normalization conventions, alignment, artifact measures."""

import json

import numpy as np
import pytest

import fpmkit as fk
from fpmkit.metrics import MetricReport


class TestRmse:
    def test_identical_images_score_zero(self):
        rng = np.random.default_rng(1)
        f = rng.standard_normal((16, 16))
        assert fk.rmse(f, f) == 0.0

    def test_normalized_by_reference_range(self):
        reference = np.zeros((8, 8))
        reference[0, 0] = 2.0
        test = reference + 0.2
        assert fk.rmse(reference, test) == pytest.approx(0.1)

    def test_unit_constant_against_zero_is_one(self):
        ones = np.ones((8, 8))
        zeros = np.zeros((8, 8))
        assert fk.rmse(ones, zeros) == pytest.approx(1.0)
        assert fk.rmse(zeros, zeros) == 0.0

    def test_complex_references_use_magnitude_range(self):
        rng = np.random.default_rng(2)
        f = rng.standard_normal((8, 8)) + 1j * rng.standard_normal((8, 8))
        assert fk.rmse(f, f) == 0.0
        assert fk.rmse(f, f + 0.1) > 0.0

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            fk.rmse(np.ones((4, 4)), np.ones((4, 5)))


class TestPhaseAlign:
    def test_recovers_global_offset(self):
        rng = np.random.default_rng(3)
        reference = rng.uniform(-1.0, 1.0, (12, 12))
        shifted = reference + 0.7
        aligned = fk.phase_align(shifted, reference)
        assert np.allclose(aligned, reference, atol=1e-12)

    def test_handles_wrap_around(self):
        reference = np.full((6, 6), 3.0)
        shifted = np.full((6, 6), 3.0 + 2 * np.pi)
        aligned = fk.phase_align(shifted, reference)
        assert np.allclose(np.angle(np.exp(1j * (aligned - reference))), 0.0, atol=1e-12)

    def test_output_wrapped(self):
        aligned = fk.phase_align(np.full((4, 4), 10.0), np.zeros((4, 4)))
        assert np.all(aligned > -np.pi)
        assert np.all(aligned <= np.pi)


class TestBackgroundPhaseStd:
    def test_flat_region_scores_zero(self):
        phase = np.zeros((32, 32))
        assert fk.background_phase_std(phase, (4, 4, 8, 8)) == 0.0

    def test_known_standard_deviation(self):
        rng = np.random.default_rng(4)
        phase = rng.normal(0.0, 0.05, (64, 64))
        measured = fk.background_phase_std(phase, (0, 0, 64, 64))
        assert measured == pytest.approx(phase.std())

    def test_region_bounds_checked(self):
        with pytest.raises(ValueError):
            fk.background_phase_std(np.zeros((8, 8)), (4, 4, 8, 8))
        with pytest.raises(ValueError):
            fk.background_phase_std(np.zeros((8, 8)), (0, 0, 0, 4))


class TestAxisArtifactEnergy:
    def test_axis_only_spectrum_scores_one(self):
        spectrum = np.zeros((32, 32), dtype=complex)
        spectrum[0, 10] = 3.0
        spectrum[7, 0] = 2.0
        assert fk.axis_artifact_energy(spectrum) == pytest.approx(1.0)

    def test_off_axis_spectrum_scores_zero(self):
        spectrum = np.zeros((32, 32), dtype=complex)
        spectrum[5, 9] = 1.0
        assert fk.axis_artifact_energy(spectrum) == 0.0

    def test_dc_disk_excluded(self):
        spectrum = np.zeros((32, 32), dtype=complex)
        spectrum[0, 2] = 100.0  # inside the excluded disk
        spectrum[9, 9] = 1.0
        assert fk.axis_artifact_energy(spectrum, exclude_dc_radius=3) == 0.0

    def test_ramp_image_concentrates_on_axes(self):
        ramp = np.linspace(0.0, 1.0, 64)[:, None] * np.ones(64)
        fraction = fk.axis_artifact_energy(fk.dft2(ramp))
        assert fraction > 0.9

    def test_empty_spectrum_scores_zero(self):
        assert fk.axis_artifact_energy(np.zeros((16, 16))) == 0.0


class TestBlockConsistency:
    def test_identical_blocks_score_zero(self):
        rng = np.random.default_rng(5)
        full = rng.uniform(-0.5, 0.5, (64, 64))
        sub = full[16:48, 8:40].copy()
        assert fk.block_consistency(full, sub, (16, 8)) < 1e-12

    def test_global_offset_ignored(self):
        rng = np.random.default_rng(6)
        full = rng.uniform(-0.5, 0.5, (64, 64))
        sub = full[:32, :32] + 1.3
        assert fk.block_consistency(full, sub, (0, 0)) < 1e-12

    def test_detects_disagreement(self):
        rng = np.random.default_rng(7)
        full = rng.uniform(-0.5, 0.5, (64, 64))
        sub = rng.uniform(-0.5, 0.5, (32, 32))
        assert fk.block_consistency(full, sub, (0, 0)) > 0.1

    def test_origin_bounds_checked(self):
        with pytest.raises(ValueError):
            fk.block_consistency(np.zeros((32, 32)), np.zeros((16, 16)), (20, 20))

    def test_guard_band_cannot_eat_block(self):
        with pytest.raises(ValueError):
            fk.block_consistency(
                np.zeros((8, 8)), np.zeros((2, 2)), guard_fraction=0.5
            )


class TestMetricReport:
    def test_serializes_populated_fields_only(self):
        report = MetricReport(rmse_phase=0.5)
        payload = json.loads(report.to_json())
        assert payload == {"rmse_phase": 0.5}

    def test_round_trips_through_dict(self):
        report = MetricReport(rmse_intensity=1.0, background_phase_std=0.01)
        assert report.as_dict() == {
            "rmse_intensity": 1.0,
            "background_phase_std": 0.01,
        }
