from pathlib import Path

import numpy as np
import pytest

from panosynth.geometry.stitcher import DIRECTIONS
from panosynth.geometry.synthetic import SyntheticRig, make_rig, smooth_strip
from panosynth.imaging.io import load_palette, save_image, save_labels
from panosynth.imaging.models import LabelMap, Palette, Raster


def view_labels(view: Raster) -> LabelMap:
    """Class map derived from a view's red channel (classes 0..7)."""
    return LabelMap((view.pixels[..., 0] // 32).astype(np.uint8), view.valid)


@pytest.fixture(scope="session")
def palette() -> Palette:
    return load_palette()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def small_rig() -> SyntheticRig:
    """800 px strip: views are 304x120, d = 200."""
    return make_rig(smooth_strip(800, 120, np.random.default_rng(7), max_cycles=12), fov_deg=100.0)


@pytest.fixture(scope="session")
def other_rig() -> SyntheticRig:
    return make_rig(smooth_strip(800, 120, np.random.default_rng(8), max_cycles=12), fov_deg=100.0)


@pytest.fixture
def write_sequence(palette):
    """Write rigs as frames 0000, 0001, ... of root/<name>/<direction>/{rgb,labels}."""

    def write(root: Path, name: str, rigs: list[SyntheticRig]) -> Path:
        for index, rig in enumerate(rigs):
            for direction, view in zip(DIRECTIONS, rig.views):
                frame = f"{index:04d}.png"
                save_image(root / name / direction / "rgb" / frame, view)
                save_labels(root / name / direction / "labels" / frame, view_labels(view), palette)
        return root / name

    return write


@pytest.fixture
def sequence_tree(tmp_path, write_sequence, small_rig, other_rig) -> Path:
    """Input root holding one two-frame sequence, ``seq-a``."""
    root = tmp_path / "input"
    write_sequence(root, "seq-a", [small_rig, other_rig])
    return root
