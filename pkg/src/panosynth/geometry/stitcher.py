"""Assemble four warped rig images into a 360 degree panorama.

Image k of the rig order is translated by t_x = k*d (t_y = 0) and written
first-valid-wins onto a canvas exactly 4*d columns wide. The back image's
right overlap wraps onto the start of the canvas.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence, TypeVar

import numpy as np
from pydantic import BaseModel

from panosynth.geometry.cylproj import CylindricalCamera, warp_to_cylinder
from panosynth.imaging.io import save_image, save_labels
from panosynth.imaging.models import (
    ConfigError,
    DimensionError,
    ImageIOError,
    LabelMap,
    Palette,
    Raster,
    StitchCoverageError,
    UnsupportedFovError,
    check_pair,
)
from panosynth.imaging.ops import resize

logger = logging.getLogger(__name__)

DIRECTIONS = ("left", "forward", "right", "back")
FOV_SPLITS = {360: 1, 180: 2, 90: 4}
SPLIT_ALIGN = 16

ImageT = TypeVar("ImageT", Raster, LabelMap)


@dataclass(frozen=True)
class RigCalibration:
    d: int
    cam: CylindricalCamera
    order: tuple[str, ...] = DIRECTIONS
    fov_per_image: float = 100.0

    def __post_init__(self) -> None:
        if self.d <= 0:
            raise ConfigError(f"distance parameter d must be > 0, got {self.d}")
        if sorted(self.order) != sorted(DIRECTIONS):
            raise ConfigError(f"order must be a permutation of {DIRECTIONS}, got {self.order}")
        if 4 * self.fov_per_image < 360:
            raise ConfigError(f"four images of {self.fov_per_image} degrees cannot cover 360 degrees")

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(k * self.d for k in range(len(self.order)))

    @property
    def width(self) -> int:
        return len(self.order) * self.d


class PanoramaSidecar(BaseModel):
    """JSON sidecar written next to every stitched panorama."""

    d: int
    order: list[str]
    f: float
    r: float
    source_ids: list[str]
    start_column: int
    seam_offsets: list[int]
    width: int
    height: int
    invalid_pixels: int


@dataclass(frozen=True)
class Panorama:
    rgb: Raster
    labels: LabelMap | None
    seam_offsets: tuple[int, ...]
    source_ids: tuple[str, ...]
    calibration: RigCalibration
    start_column: int = 0

    def __post_init__(self) -> None:
        check_pair(self.rgb, self.labels)

    @property
    def width(self) -> int:
        return self.rgb.width

    @property
    def height(self) -> int:
        return self.rgb.height

    @property
    def invalid_pixels(self) -> int:
        return int((~self.rgb.valid).sum())

    def sidecar(self) -> PanoramaSidecar:
        cal = self.calibration
        return PanoramaSidecar(
            d=cal.d,
            order=list(cal.order),
            f=cal.cam.f,
            r=cal.cam.r,
            source_ids=list(self.source_ids),
            start_column=self.start_column,
            seam_offsets=list(self.seam_offsets),
            width=self.width,
            height=self.height,
            invalid_pixels=self.invalid_pixels,
        )


# ---------------------------------------------------------------------------
# Compositing
# ---------------------------------------------------------------------------


def translate_compose(canvas: ImageT, img: ImageT, t_x: int, t_y: int = 0, *, wrap: bool = False) -> ImageT:
    """Place ``img`` on ``canvas`` at (t_x, t_y), keeping existing valid pixels.

    With ``wrap`` the columns are taken modulo the canvas width; otherwise
    the parts of ``img`` that fall outside the canvas are dropped.
    """
    if type(canvas) is not type(img):
        raise TypeError(f"cannot compose {type(img).__name__} onto {type(canvas).__name__}")
    if wrap and img.width > canvas.width:
        raise DimensionError(f"a {img.width}-wide image cannot wrap onto a {canvas.width}-wide canvas")

    cols = np.arange(img.width) + int(t_x)
    rows = np.arange(img.height) + int(t_y)
    col_keep = np.ones(img.width, dtype=bool) if wrap else (cols >= 0) & (cols < canvas.width)
    row_keep = (rows >= 0) & (rows < canvas.height)
    if wrap:
        cols = cols % canvas.width
    if not col_keep.any() or not row_keep.any():
        return canvas

    src_ix = np.ix_(np.flatnonzero(row_keep), np.flatnonzero(col_keep))
    dst_ix = np.ix_(rows[row_keep], cols[col_keep])

    data = canvas.data.copy()
    valid = canvas.valid.copy()
    write = img.valid[src_ix] & ~valid[dst_ix]

    block = data[dst_ix]
    block[write] = img.data[src_ix][write]
    data[dst_ix] = block
    valid[dst_ix] = valid[dst_ix] | write
    return canvas.with_data(data, valid)


def _compose_ring(warped: Sequence[ImageT], calib: RigCalibration, blank: ImageT) -> ImageT:
    start, stop = calib.cam.valid_band()
    canvas = blank
    for offset, img in zip(calib.offsets, warped):
        canvas = translate_compose(canvas, img.crop(start, stop + 1), offset, 0, wrap=True)
    return canvas


def stitch_panorama(
    images: Sequence[Raster],
    calib: RigCalibration,
    labels: Sequence[LabelMap] | None = None,
    source_ids: Sequence[str] | None = None,
    *,
    require_full: bool = False,
) -> Panorama:
    """Warp, translate and compose four rig images (and labels) into a panorama.

    ``images`` follow ``calib.order``. The panorama is exactly ``4*d`` columns
    wide and starts at the first valid column of the first image. Every
    column must be covered on the centre rows, otherwise StitchCoverageError
    (d too large for the rig's overlap). Corners outside the cylinder's
    vertical envelope stay invalid unless ``require_full`` is set.
    """
    cam = calib.cam
    n = len(calib.order)
    if len(images) != n:
        raise DimensionError(f"expected {n} images, got {len(images)}")
    if labels is not None and len(labels) != n:
        raise DimensionError(f"expected {n} label maps, got {len(labels)}")
    for k, img in enumerate(images):
        if (img.width, img.height) != (cam.width, cam.height):
            raise DimensionError(
                f"image {k} is {img.width}x{img.height}, calibration expects {cam.width}x{cam.height}"
            )
        if labels is not None:
            check_pair(img, labels[k])

    start, stop = cam.valid_band()
    if stop - start + 1 > calib.width:
        raise DimensionError(f"valid band of {stop - start + 1} px is wider than the {calib.width} px panorama")

    rgb = _compose_ring(
        [warp_to_cylinder(img, cam) for img in images], calib, Raster.blank(calib.width, cam.height)
    )
    label_pano = None
    if labels is not None:
        label_pano = _compose_ring(
            [warp_to_cylinder(lab, cam) for lab in labels], calib, LabelMap.blank(calib.width, cam.height)
        )

    centre_rows = sorted({math.floor(cam.center_y), math.ceil(cam.center_y)})
    uncovered = int((~rgb.valid[centre_rows].all(axis=0)).sum())
    if uncovered:
        raise StitchCoverageError(
            f"{uncovered} panorama columns have no valid pixel; d={calib.d} exceeds the rig overlap"
        )
    holes = int((~rgb.valid).sum())
    if holes and require_full:
        raise StitchCoverageError(f"{holes} panorama pixels remain invalid")
    if holes:
        logger.debug("Panorama keeps %d invalid pixels outside the vertical envelope", holes)

    ids = tuple(source_ids) if source_ids is not None else tuple(calib.order)
    logger.info("Stitched %dx%d panorama (d=%d, order=%s)", rgb.width, rgb.height, calib.d, ",".join(calib.order))
    return Panorama(rgb, label_pano, calib.offsets, ids, calib)


# ---------------------------------------------------------------------------
# Post-processing
# ---------------------------------------------------------------------------


def rotate_start(p: Panorama, start_column: int) -> Panorama:
    """Cyclically rotate the panorama so ``start_column`` becomes column 0."""
    if not 0 <= start_column < p.width:
        raise DimensionError(f"start column {start_column} outside 0..{p.width - 1}")
    if start_column == 0:
        return p

    def roll(img: ImageT) -> ImageT:
        return img.with_data(np.roll(img.data, -start_column, axis=1), np.roll(img.valid, -start_column, axis=1))

    return replace(
        p,
        rgb=roll(p.rgb),
        labels=roll(p.labels) if p.labels is not None else None,
        start_column=(p.start_column + start_column) % p.width,
    )


def resize_panorama(p: Panorama, width: int, height: int) -> Panorama:
    """Resize the RGB bilinearly and the labels by nearest neighbour."""
    return replace(
        p,
        rgb=resize(p.rgb, width, height),
        labels=resize(p.labels, width, height) if p.labels is not None else None,
    )


def split_by_fov(p: Panorama, fov: int, align: int = SPLIT_ALIGN) -> list[tuple[Raster, LabelMap | None]]:
    """Partition the panorama into 360/fov equal, non-overlapping crops."""
    if fov not in FOV_SPLITS:
        raise UnsupportedFovError(f"FoV {fov} is not one of {sorted(FOV_SPLITS)}")
    count = FOV_SPLITS[fov]
    if p.width % (count * align):
        raise DimensionError(
            f"panorama width {p.width} is not divisible by {count}x{align}; resize it first"
        )
    step = p.width // count
    crops = []
    for k in range(count):
        x0, x1 = k * step, (k + 1) * step
        crops.append((p.rgb.crop(x0, x1), p.labels.crop(x0, x1) if p.labels is not None else None))
    return crops


def save_panorama(
    p: Panorama,
    out_dir: str | Path,
    name: str,
    palette: Palette,
    void_class: int = 15,
) -> list[Path]:
    """Write ``rgb/<name>.png``, ``labels/<name>.png`` and ``meta/<name>.json``.

    Either all files are written or none are left behind.
    """
    out_dir = Path(out_dir)
    paths: list[Path] = []
    try:
        paths.append(save_image(out_dir / "rgb" / f"{name}.png", p.rgb))
        if p.labels is not None:
            paths.append(save_labels(out_dir / "labels" / f"{name}.png", p.labels, palette, void_class))
        meta = out_dir / "meta" / f"{name}.json"
        try:
            meta.parent.mkdir(parents=True, exist_ok=True)
            meta.write_text(p.sidecar().model_dump_json(indent=2) + "\n")
        except OSError as exc:
            raise ImageIOError(f"Cannot write {meta}: {exc}") from exc
        paths.append(meta)
    except Exception:
        for path in paths:
            path.unlink(missing_ok=True)
        raise
    return paths
