"""Cylindrical projection of planar camera images.

A planar image with focal length ``f`` is wrapped onto a cylinder of radius
``r`` around the camera axis. Coordinates are centre-origin: a pixel at
storage (column, row) sits at ``x = column - (width - 1) / 2`` and
``y = row - (height - 1) / 2``, so pixel centres lie on integers.

Warping only ever uses the backward map (cylinder -> plane) followed by
sampling, which leaves no unfilled pixels in the output.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, TypeVar

import cv2
import numpy as np

from panosynth.imaging.models import (
    ConfigError,
    DimensionError,
    LabelMap,
    ProjectionSingularityError,
    Raster,
)

logger = logging.getLogger(__name__)

SYNTHIA_FOCAL_LENGTH = 532.740352

ImageT = TypeVar("ImageT", Raster, LabelMap)

# Tolerance on source bounds; maps are clipped back inside before sampling.
_BOUND_EPS = 1e-6
_MASK_EPS = 1e-3


class ImagePoint(NamedTuple):
    """A centre-origin point, x to the right and y downwards, in pixels."""

    x: float
    y: float


@dataclass(frozen=True)
class CylindricalCamera:
    """Camera parameters of the projection.

    ``r`` defaults to ``f``, which makes the cylinder tangent to the image plane.
    """

    f: float
    width: int
    height: int
    r: float | None = None

    def __post_init__(self) -> None:
        if self.r is None:
            object.__setattr__(self, "r", self.f)
        if not self.f > 0:
            raise ConfigError(f"focal length must be > 0, got {self.f}")
        if not self.r > 0:
            raise ConfigError(f"cylinder radius must be > 0, got {self.r}")
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"camera size must be positive, got {self.width}x{self.height}")

    @property
    def center_x(self) -> float:
        return (self.width - 1) / 2

    @property
    def center_y(self) -> float:
        return (self.height - 1) / 2

    @property
    def band_half_width(self) -> float:
        """Half-width of the valid band on the warped canvas."""
        return self.r * math.atan(self.center_x / self.f)

    def valid_band(self) -> tuple[int, int]:
        """Inclusive first and last canvas column of the valid band."""
        lo = self.center_x - self.band_half_width
        hi = self.center_x + self.band_half_width
        return max(0, math.ceil(lo - _BOUND_EPS)), min(self.width - 1, math.floor(hi + _BOUND_EPS))

    def to_storage(self, p: ImagePoint) -> tuple[float, float]:
        """Centre-origin point -> (column, row)."""
        return p.x + self.center_x, p.y + self.center_y

    def from_storage(self, column: float, row: float) -> ImagePoint:
        return ImagePoint(column - self.center_x, row - self.center_y)


def analytic_band_width(f: float, width: int, r: float | None = None) -> float:
    """Width 2*r*atan(W/2f) of the valid band for a W-pixel-wide source."""
    r = f if r is None else r
    return 2 * r * math.atan(width / (2 * f))


# ---------------------------------------------------------------------------
# Analytic maps
# ---------------------------------------------------------------------------


def project_forward(p: ImagePoint, cam: CylindricalCamera) -> ImagePoint:
    """Plane -> cylinder: x' = r*atan(x/f), y' = r*y/sqrt(x^2+f^2)."""
    return ImagePoint(
        cam.r * math.atan(p.x / cam.f),
        cam.r * p.y / math.hypot(p.x, cam.f),
    )


def project_backward(q: ImagePoint, cam: CylindricalCamera) -> ImagePoint:
    """Cylinder -> plane: x = f*tan(x'/r), y = (y'/r)*sqrt(x^2+f^2)."""
    if abs(q.x) >= cam.r * math.pi / 2:
        raise ProjectionSingularityError(
            f"x'={q.x} is at or beyond the singularity r*pi/2={cam.r * math.pi / 2:.6f}"
        )
    x = cam.f * math.tan(q.x / cam.r)
    return ImagePoint(x, q.y / cam.r * math.hypot(x, cam.f))


def forward_arrays(x: np.ndarray, y: np.ndarray, cam: CylindricalCamera) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised project_forward."""
    return cam.r * np.arctan(x / cam.f), cam.r * y / np.hypot(x, cam.f)


def backward_arrays(
    xp: np.ndarray, yp: np.ndarray, cam: CylindricalCamera
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised project_backward; returns (x, y, defined) with NaN where singular."""
    defined = np.abs(xp) < cam.r * math.pi / 2
    x = np.where(defined, cam.f * np.tan(np.where(defined, xp, 0.0) / cam.r), np.nan)
    y = yp / cam.r * np.hypot(x, cam.f)
    return x, y, defined


# ---------------------------------------------------------------------------
# Warping
# ---------------------------------------------------------------------------


@lru_cache(maxsize=32)
def cylinder_maps(cam: CylindricalCamera) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Backward sampling grids for a camera.

    Returns (map_x, map_y, inside): float32 source coordinates for every
    canvas pixel, and the mask of canvas pixels whose preimage lies in the
    source image.
    """
    cols = np.arange(cam.width, dtype=np.float64) - cam.center_x
    rows = np.arange(cam.height, dtype=np.float64) - cam.center_y
    xp, yp = np.meshgrid(cols, rows)

    x, y, defined = backward_arrays(xp, yp, cam)
    src_x = x + cam.center_x
    src_y = y + cam.center_y
    with np.errstate(invalid="ignore"):
        inside = (
            defined
            & (src_x >= -_BOUND_EPS)
            & (src_x <= cam.width - 1 + _BOUND_EPS)
            & (src_y >= -_BOUND_EPS)
            & (src_y <= cam.height - 1 + _BOUND_EPS)
        )

    map_x = np.where(inside, np.clip(np.nan_to_num(src_x), 0, cam.width - 1), -1).astype(np.float32)
    map_y = np.where(inside, np.clip(np.nan_to_num(src_y), 0, cam.height - 1), -1).astype(np.float32)
    for arr in (map_x, map_y, inside):
        arr.flags.writeable = False
    return map_x, map_y, inside


def warp_to_cylinder(img: ImageT, cam: CylindricalCamera) -> ImageT:
    """Project an image onto the cylinder, keeping the source canvas size.

    Rasters are sampled bilinearly, label maps by nearest neighbour. Canvas
    pixels without a preimage in the source are invalid; the valid region is
    a centred band of half-width r*atan(((width-1)/2)/f).
    """
    if (img.width, img.height) != (cam.width, cam.height):
        raise DimensionError(
            f"image is {img.width}x{img.height} but the camera expects {cam.width}x{cam.height}"
        )
    map_x, map_y, inside = cylinder_maps(cam)

    if isinstance(img, LabelMap):
        classes = cv2.remap(
            img.classes, map_x, map_y, cv2.INTER_NEAREST, borderMode=cv2.BORDER_CONSTANT, borderValue=0
        )
        src_valid = cv2.remap(
            img.valid.astype(np.uint8), map_x, map_y, cv2.INTER_NEAREST, borderMode=cv2.BORDER_CONSTANT, borderValue=0
        )
        return LabelMap(classes, inside & (src_valid > 0))

    pixels = cv2.remap(
        img.pixels, map_x, map_y, cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=(0, 0, 0)
    )
    coverage = cv2.remap(
        img.valid.astype(np.float32), map_x, map_y, cv2.INTER_LINEAR, borderMode=cv2.BORDER_CONSTANT, borderValue=0
    )
    return Raster(pixels, inside & (coverage >= 1.0 - _MASK_EPS))


def measured_band(img: Raster | LabelMap) -> tuple[int, int] | None:
    """First and last valid column on the centre row, or None if the row is empty."""
    row = img.valid[img.height // 2]
    cols = np.flatnonzero(row)
    if cols.size == 0:
        return None
    return int(cols[0]), int(cols[-1])
