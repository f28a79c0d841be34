"""End-to-end rig simulation: strip -> four planar views -> match -> stitch -> compare."""

import math

import numpy as np
import pytest

from panosynth.geometry.cylproj import warp_to_cylinder
from panosynth.geometry.regmatch import MatchConfig, adjacent_pairs, estimate_rig_distance
from panosynth.geometry.stitcher import RigCalibration, stitch_panorama
from panosynth.geometry.synthetic import make_rig, smooth_strip
from panosynth.imaging.models import ConfigError, Raster


@pytest.fixture(scope="module")
def full_rig():
    return make_rig(smooth_strip(4000, 760, np.random.default_rng(2024)), fov_deg=100.0)


def test_rig_geometry(full_rig):
    assert full_rig.d == 1000
    assert full_rig.cam.f == pytest.approx(4000 / (2 * math.pi))
    assert full_rig.cam.width == 1518
    assert all((v.width, v.height) == (1518, 760) for v in full_rig.views)


def test_strip_closes_at_the_seam():
    strip = smooth_strip(400, 20, np.random.default_rng(0), max_cycles=4).pixels.astype(int)
    seam = np.abs(strip[:, 0] - strip[:, -1]).max()
    beside = max(np.abs(strip[:, 1] - strip[:, 0]).max(), np.abs(strip[:, -1] - strip[:, -2]).max())
    assert seam <= beside + 6


def test_strip_width_must_split_in_four():
    with pytest.raises(ConfigError):
        make_rig(Raster(np.zeros((10, 402, 3), dtype=np.uint8)))


def test_match_then_stitch_recovers_strip(full_rig):
    cam = full_rig.cam
    warped = [warp_to_cylinder(v, cam) for v in full_rig.views]
    _, stop = cam.valid_band()

    estimate = estimate_rig_distance(adjacent_pairs(warped), MatchConfig(x_c1=stop - 6))
    assert abs(estimate.d - full_rig.d) <= 1
    assert estimate.calibration_warning is None

    pano = stitch_panorama(list(full_rig.views), RigCalibration(d=full_rig.d, cam=cam))
    assert (pano.width, pano.height) == (4000, 760)

    cols = full_rig.strip_column(np.arange(pano.width))
    expected = full_rig.strip.pixels[:, cols].astype(int)
    interior = pano.rgb.valid.copy()
    interior[:20] = interior[-20:] = False
    assert interior.sum() > 0.75 * interior.size
    assert np.abs(pano.rgb.pixels.astype(int) - expected)[interior].mean() <= 2.0
