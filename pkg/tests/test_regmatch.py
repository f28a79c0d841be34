import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from panosynth.geometry.cylproj import warp_to_cylinder
from panosynth.geometry.regmatch import (
    MatchConfig,
    adjacent_pairs,
    discrepancy,
    estimate_rig_distance,
    scan_match,
)
from panosynth.imaging.models import ConfigError, EmptyCandidateError, Raster, RegionError


def noise(width: int, height: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).integers(0, 256, (height, width, 3), dtype=np.uint8)


def shifted_pair(pixels: np.ndarray, shift: int) -> tuple[Raster, Raster]:
    """i2[:, c] = i1[:, c + shift]; the last ``shift`` columns of i2 are invalid."""
    valid = np.ones(pixels.shape[:2], dtype=bool)
    valid[:, pixels.shape[1] - shift :] = False
    return Raster(pixels), Raster(np.roll(pixels, -shift, axis=1), valid)


class TestDiscrepancy:
    def test_identical_regions(self):
        region = noise(9, 5)
        assert discrepancy(region, region) == 0

    def test_single_channel(self):
        assert discrepancy(np.array([[10]]), np.array([[3]])) == 7

    def test_rgb_regions(self):
        a = np.array([[[1, 2, 3], [4, 5, 6]]], dtype=np.uint8)
        b = np.array([[[2, 2, 3], [4, 7, 6]]], dtype=np.uint8)
        assert discrepancy(a, b) == 3

    def test_uint8_does_not_wrap(self):
        assert discrepancy(np.array([[0]], dtype=np.uint8), np.array([[255]], dtype=np.uint8)) == 255

    def test_shape_mismatch(self):
        with pytest.raises(RegionError):
            discrepancy(noise(3, 2), noise(4, 2))

    def test_invalid_raster_region(self):
        region = Raster(noise(3, 2), np.array([[True, True, False], [True, True, True]]))
        with pytest.raises(RegionError):
            discrepancy(region, region)


class TestMatchConfig:
    @pytest.mark.parametrize("width", [0, 4, 8])
    def test_region_width_must_be_odd(self, width):
        with pytest.raises(ConfigError):
            MatchConfig(region_width=width)

    def test_empty_ranges(self):
        with pytest.raises(ConfigError):
            MatchConfig(region_rows=(5, 5))
        with pytest.raises(ConfigError):
            MatchConfig(scan_range=(10, 2))


class TestScanMatch:
    def test_known_shift(self):
        i1, i2 = shifted_pair(noise(200, 12), 50)
        curve = scan_match(i1, i2, MatchConfig(x_c1=100))
        assert curve.best_x_c2 == 50
        assert curve.d == 50
        assert curve.min_dv == 0
        assert curve.dv_at(50) == 0
        zeros = [x for x, dv in curve.candidates if dv == 0]
        assert zeros == [50]

    @settings(max_examples=100, deadline=None)
    @given(st.data())
    def test_shift_recovery(self, data):
        width = data.draw(st.integers(40, 120))
        height = data.draw(st.integers(3, 12))
        shift = data.draw(st.integers(1, width - 20))
        x_c1 = data.draw(st.integers(shift + 4, width - 5))
        seed = data.draw(st.integers(0, 2**32 - 1))
        i1, i2 = shifted_pair(noise(width, height, seed), shift)

        curve = scan_match(i1, i2, MatchConfig(x_c1=x_c1))
        assert curve.d == shift
        assert curve.min_dv == 0

    def test_invalid_candidates_are_skipped(self):
        i1, i2 = shifted_pair(noise(100, 6), 30)
        curve = scan_match(i1, i2, MatchConfig(x_c1=60))
        assert all(x_c2 + 4 < 70 for x_c2, _ in curve.candidates)

    def test_ties_resolve_left(self):
        flat = Raster(np.full((4, 40, 3), 9, dtype=np.uint8))
        curve = scan_match(flat, flat, MatchConfig(x_c1=20, region_width=3))
        assert curve.best_x_c2 == 1

    def test_scan_range_outside_valid_band(self):
        pixels = noise(100, 6)
        valid = np.zeros((6, 100), dtype=bool)
        valid[:, :10] = True
        with pytest.raises(EmptyCandidateError):
            scan_match(Raster(pixels), Raster(pixels, valid), MatchConfig(x_c1=50, scan_range=(50, 60)))

    def test_reference_region_leaves_image(self):
        img = Raster(noise(20, 4))
        with pytest.raises(RegionError):
            scan_match(img, img, MatchConfig(x_c1=18))

    def test_reference_region_invalid_at_centre(self):
        valid = np.ones((6, 30), dtype=bool)
        valid[:, 14] = False
        img = Raster(noise(30, 6), valid)
        with pytest.raises(RegionError):
            scan_match(img, img, MatchConfig(x_c1=15))

    def test_region_rows_default_to_valid_rows(self):
        valid = np.ones((10, 40), dtype=bool)
        valid[:2, 25:] = False
        valid[8:, 25:] = False
        i1 = Raster(noise(40, 10), valid)
        curve = scan_match(i1, Raster(noise(40, 10, 1)), MatchConfig(x_c1=28))
        assert curve.rows == (2, 8)

    def test_csv(self, tmp_path):
        i1, i2 = shifted_pair(noise(60, 4), 10)
        curve = scan_match(i1, i2, MatchConfig(x_c1=30))
        path = curve.to_csv(tmp_path / "curve.csv")
        with path.open() as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["x_c2", "dv"]
        assert len(rows) == len(curve.candidates) + 1
        assert ["20", "0"] in rows


class TestRigDistance:
    def pairs(self, shifts):
        return [shifted_pair(noise(1000, 4, seed), s) for seed, s in enumerate(shifts)]

    def test_median_of_seams(self):
        estimate = estimate_rig_distance(self.pairs([836, 836, 835]), MatchConfig(x_c1=900))
        assert estimate.d == 836
        assert estimate.pair_d == (836, 836, 835)
        assert estimate.calibration_warning is None

    def test_single_pair(self):
        assert estimate_rig_distance(self.pairs([700]), MatchConfig(x_c1=900)).d == 700

    def test_spread_warning(self):
        estimate = estimate_rig_distance(self.pairs([800, 836, 872]), MatchConfig(x_c1=900), spread_threshold=4)
        assert estimate.d == 836
        assert estimate.spread == 72
        assert estimate.calibration_warning is not None

    def test_even_count_rounds_half_to_even(self):
        assert estimate_rig_distance(self.pairs([10, 11]), MatchConfig(x_c1=900)).d == 10

    def test_no_pairs(self):
        with pytest.raises(ConfigError):
            estimate_rig_distance([], MatchConfig())

    def test_adjacent_pairs_close_the_ring(self):
        images = [Raster(noise(4, 2, k)) for k in range(4)]
        pairs = adjacent_pairs(images)
        assert len(pairs) == 4
        assert pairs[3][0] is images[3] and pairs[3][1] is images[0]

    def test_synthetic_rig_seams(self, small_rig):
        cam = small_rig.cam
        warped = [warp_to_cylinder(v, cam) for v in small_rig.views]
        _, stop = cam.valid_band()
        estimate = estimate_rig_distance(adjacent_pairs(warped), MatchConfig(x_c1=stop - 6))
        assert estimate.pair_d == (small_rig.d,) * 4
        assert estimate.d == small_rig.d
