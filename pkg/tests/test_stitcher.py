import json

import numpy as np
import pytest

from panosynth.geometry.cylproj import SYNTHIA_FOCAL_LENGTH, CylindricalCamera
from panosynth.geometry.stitcher import (
    Panorama,
    RigCalibration,
    resize_panorama,
    rotate_start,
    save_panorama,
    split_by_fov,
    stitch_panorama,
    translate_compose,
)
from panosynth.imaging.io import load_image, load_labels
from panosynth.imaging.models import (
    ConfigError,
    DimensionError,
    LabelMap,
    Raster,
    StitchCoverageError,
    UnsupportedFovError,
)

from conftest import view_labels


def make_panorama(width: int, height: int, seed: int = 0) -> Panorama:
    rng = np.random.default_rng(seed)
    rgb = Raster(rng.integers(0, 256, (height, width, 3), dtype=np.uint8))
    labels = LabelMap(rng.integers(0, 14, (height, width), dtype=np.uint8))
    cam = CylindricalCamera(f=SYNTHIA_FOCAL_LENGTH, width=1280, height=height)
    calib = RigCalibration(d=width // 4, cam=cam)
    return Panorama(rgb, labels, calib.offsets, ("a", "b", "c", "d"), calib)


class TestCalibration:
    def test_offsets_and_width(self):
        calib = RigCalibration(d=836, cam=CylindricalCamera(f=SYNTHIA_FOCAL_LENGTH, width=1280, height=760))
        assert calib.offsets == (0, 836, 1672, 2508)
        assert calib.width == 3344

    @pytest.mark.parametrize(
        "kwargs",
        [{"d": 0}, {"d": 10, "order": ("left", "left", "right", "back")}, {"d": 10, "fov_per_image": 80.0}],
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            RigCalibration(cam=CylindricalCamera(f=10, width=20, height=10), **kwargs)


class TestTranslateCompose:
    def test_onto_empty_canvas(self):
        img = Raster(np.full((2, 3, 3), 7, dtype=np.uint8))
        out = translate_compose(Raster.blank(10, 2), img, 4)
        assert out.valid[:, 4:7].all()
        assert not out.valid[:, :4].any() and not out.valid[:, 7:].any()
        assert (out.pixels[:, 4:7] == 7).all()

    def test_first_valid_wins(self):
        a = Raster(np.full((1, 2, 3), 10, dtype=np.uint8))
        b = Raster(np.full((1, 2, 3), 99, dtype=np.uint8))
        out = translate_compose(translate_compose(Raster.blank(3, 1), a, 0), b, 1)
        assert out.pixels[0, :, 0].tolist() == [10, 10, 99]

    def test_same_image_twice_is_idempotent(self):
        img = LabelMap(np.array([[1, 2, 3]], dtype=np.uint8))
        once = translate_compose(LabelMap.blank(5, 1), img, 1)
        twice = translate_compose(once, img, 1)
        assert np.array_equal(once.classes, twice.classes)
        assert np.array_equal(once.valid, twice.valid)

    def test_wrap(self):
        img = LabelMap(np.array([[1, 2, 3]], dtype=np.uint8))
        out = translate_compose(LabelMap.blank(4, 1), img, 3, wrap=True)
        assert out.classes.tolist() == [[2, 3, 0, 1]]
        assert out.valid.tolist() == [[True, True, False, True]]

    def test_no_wrap_drops_overhang(self):
        img = LabelMap(np.array([[1, 2, 3]], dtype=np.uint8))
        out = translate_compose(LabelMap.blank(4, 1), img, 3)
        assert out.valid.tolist() == [[False, False, False, True]]

    def test_mixed_types(self):
        with pytest.raises(TypeError):
            translate_compose(Raster.blank(2, 2), LabelMap.blank(2, 2), 0)


class TestStitch:
    def test_synthia_geometry(self):
        cam = CylindricalCamera(f=SYNTHIA_FOCAL_LENGTH, width=1280, height=760)
        images = [Raster(np.full((760, 1280, 3), 120, dtype=np.uint8)) for _ in range(4)]
        pano = stitch_panorama(images, RigCalibration(d=836, cam=cam))
        assert (pano.width, pano.height) == (3344, 760)
        assert (pano.rgb.pixels[pano.rgb.valid] == 120).all()
        assert pano.rgb.valid[379].all() and pano.rgb.valid[380].all()

        pano_835 = stitch_panorama(images, RigCalibration(d=835, cam=cam))
        assert pano_835.width == 3340

    def test_reproduces_strip(self, small_rig):
        calib = RigCalibration(d=small_rig.d, cam=small_rig.cam)
        pano = stitch_panorama(list(small_rig.views), calib)
        assert pano.width == small_rig.strip.width

        cols = small_rig.strip_column(np.arange(pano.width))
        expected = small_rig.strip.pixels[:, cols].astype(int)
        interior = pano.rgb.valid.copy()
        interior[:10] = interior[-10:] = False
        error = np.abs(pano.rgb.pixels.astype(int) - expected)[interior]
        assert error.mean() <= 2.0

    def test_labels_follow_rgb(self, small_rig):
        calib = RigCalibration(d=small_rig.d, cam=small_rig.cam)
        labels = [view_labels(v) for v in small_rig.views]
        pano = stitch_panorama(list(small_rig.views), calib, labels)
        assert (pano.labels.width, pano.labels.height) == (pano.width, pano.height)
        assert np.array_equal(pano.labels.valid, pano.rgb.valid)
        assert pano.labels.present_classes() <= set().union(*(lab.present_classes() for lab in labels))

    @pytest.mark.parametrize("rig_name", ["small_rig", "other_rig"])
    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_rotated_rig_gives_rotated_panorama(self, request, rig_name, k):
        rig = request.getfixturevalue(rig_name)
        calib = RigCalibration(d=rig.d, cam=rig.cam)
        expected = rotate_start(stitch_panorama(list(rig.views), calib), k * rig.d)

        order = calib.order[k:] + calib.order[:k]
        views = list(rig.views[k:]) + list(rig.views[:k])
        rotated = stitch_panorama(views, RigCalibration(d=rig.d, cam=rig.cam, order=order))

        assert np.array_equal(rotated.rgb.valid, expected.rgb.valid)
        # seam overlaps keep whichever camera is composed first, so only
        # those columns may differ, by interpolation error
        diff = np.abs(rotated.rgb.pixels.astype(int) - expected.rgb.pixels.astype(int))[expected.rgb.valid]
        assert (diff == 0).mean() > 0.8
        assert diff.mean() <= 2.0

    def test_deterministic(self, small_rig):
        calib = RigCalibration(d=small_rig.d, cam=small_rig.cam)
        a = stitch_panorama(list(small_rig.views), calib)
        b = stitch_panorama(list(small_rig.views), calib)
        assert np.array_equal(a.rgb.pixels, b.rgb.pixels)

    def test_d_too_large(self, small_rig):
        calib = RigCalibration(d=small_rig.d + 40, cam=small_rig.cam)
        with pytest.raises(StitchCoverageError):
            stitch_panorama(list(small_rig.views), calib)

    def test_corners_stay_invalid_unless_full_required(self, small_rig):
        calib = RigCalibration(d=small_rig.d, cam=small_rig.cam)
        pano = stitch_panorama(list(small_rig.views), calib)
        assert pano.invalid_pixels > 0
        with pytest.raises(StitchCoverageError):
            stitch_panorama(list(small_rig.views), calib, require_full=True)

    def test_wrong_image_count(self, small_rig):
        calib = RigCalibration(d=small_rig.d, cam=small_rig.cam)
        with pytest.raises(DimensionError):
            stitch_panorama(list(small_rig.views[:3]), calib)

    def test_wrong_image_size(self, small_rig):
        calib = RigCalibration(d=small_rig.d, cam=small_rig.cam)
        images = [Raster(np.zeros((10, 10, 3), dtype=np.uint8))] * 4
        with pytest.raises(DimensionError):
            stitch_panorama(images, calib)

    def test_source_ids_default_to_order(self, small_rig):
        pano = stitch_panorama(list(small_rig.views), RigCalibration(d=small_rig.d, cam=small_rig.cam))
        assert pano.source_ids == ("left", "forward", "right", "back")
        assert pano.seam_offsets == (0, 200, 400, 600)


class TestPostProcessing:
    def test_rotate_identity(self):
        pano = make_panorama(64, 4)
        assert rotate_start(pano, 0) is pano

    def test_rotate_inverse(self):
        pano = make_panorama(64, 4)
        back = rotate_start(rotate_start(pano, 10), 54)
        assert np.array_equal(back.rgb.pixels, pano.rgb.pixels)
        assert np.array_equal(back.labels.classes, pano.labels.classes)
        assert back.start_column == 0

    def test_rotate_moves_column(self):
        pano = make_panorama(64, 4)
        rotated = rotate_start(pano, 10)
        assert np.array_equal(rotated.rgb.pixels[:, 0], pano.rgb.pixels[:, 10])
        assert rotated.start_column == 10

    def test_rotate_out_of_range(self):
        with pytest.raises(DimensionError):
            rotate_start(make_panorama(64, 4), 64)

    def test_resize_to_training_size(self):
        pano = resize_panorama(make_panorama(3340, 76), 3328, 768)
        assert (pano.width, pano.height) == (3328, 768)
        assert (pano.labels.width, pano.labels.height) == (3328, 768)

    @pytest.mark.parametrize("fov,count,width", [(90, 4, 832), (180, 2, 1664), (360, 1, 3328)])
    def test_split_partitions_panorama(self, fov, count, width):
        pano = make_panorama(3328, 768)
        crops = split_by_fov(pano, fov)
        assert len(crops) == count
        assert all(rgb.width == width and rgb.height == 768 for rgb, _ in crops)
        assert np.array_equal(np.concatenate([rgb.pixels for rgb, _ in crops], axis=1), pano.rgb.pixels)
        assert np.array_equal(np.concatenate([lab.classes for _, lab in crops], axis=1), pano.labels.classes)

    def test_split_unsupported_fov(self):
        with pytest.raises(UnsupportedFovError):
            split_by_fov(make_panorama(3328, 8), 120)

    def test_split_needs_aligned_width(self):
        with pytest.raises(DimensionError):
            split_by_fov(make_panorama(3340, 8), 90)

    def test_save(self, tmp_path, palette, small_rig):
        calib = RigCalibration(d=small_rig.d, cam=small_rig.cam)
        labels = [view_labels(v) for v in small_rig.views]
        pano = stitch_panorama(list(small_rig.views), calib, labels)
        save_panorama(pano, tmp_path, "0001", palette)

        rgb = load_image(tmp_path / "rgb" / "0001.png")
        assert np.array_equal(rgb.pixels, pano.rgb.pixels)
        saved_labels = load_labels(tmp_path / "labels" / "0001.png", palette)
        assert (saved_labels.classes[~pano.labels.valid] == 15).all()
        meta = json.loads((tmp_path / "meta" / "0001.json").read_text())
        assert meta["d"] == 200
        assert meta["width"] == 800
        assert meta["invalid_pixels"] == pano.invalid_pixels
