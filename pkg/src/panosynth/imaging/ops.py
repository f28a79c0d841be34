"""Resampling operations shared by the projection and dataset modules."""

from __future__ import annotations

import math
from typing import NamedTuple, TypeVar

import cv2
import numpy as np

from panosynth.imaging.models import DimensionError, LabelMap, Raster

ImageT = TypeVar("ImageT", Raster, LabelMap)

# Bilinear weights are floats; a resampled mask counts as valid at >= 1 - eps.
_MASK_EPS = 1e-4


class Sample(NamedTuple):
    rgb: tuple[float, float, float]
    valid: bool


def resize(img: ImageT, new_width: int, new_height: int) -> ImageT:
    """Resize a raster bilinearly or a label map by nearest neighbour.

    A resampled pixel is valid only if every source pixel contributing to it
    is valid. Resizing to the current size returns the input unchanged.
    """
    if new_width < 1 or new_height < 1:
        raise DimensionError(f"cannot resize to {new_width}x{new_height}")
    if (new_width, new_height) == (img.width, img.height):
        return img

    size = (new_width, new_height)
    if isinstance(img, LabelMap):
        classes = cv2.resize(img.classes, size, interpolation=cv2.INTER_NEAREST)
        valid = cv2.resize(img.valid.astype(np.uint8), size, interpolation=cv2.INTER_NEAREST)
        return LabelMap(classes, valid.astype(bool))

    pixels = cv2.resize(img.pixels, size, interpolation=cv2.INTER_LINEAR)
    coverage = cv2.resize(img.valid.astype(np.float32), size, interpolation=cv2.INTER_LINEAR)
    return Raster(pixels, coverage >= 1.0 - _MASK_EPS)


def sample_bilinear(img: Raster, x: float, y: float) -> Sample:
    """Sample a raster at storage coordinates (column x, row y).

    Neighbours with zero weight do not contribute, so integer coordinates
    reproduce the stored value even on the last row or column. The sample is
    invalid when a contributing neighbour is invalid or out of bounds.
    """
    x0, y0 = math.floor(x), math.floor(y)
    fx, fy = x - x0, y - y0
    total = np.zeros(3, dtype=np.float64)

    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            weight = wx * wy
            if weight == 0.0:
                continue
            col, row = x0 + dx, y0 + dy
            if not (0 <= col < img.width and 0 <= row < img.height) or not img.valid[row, col]:
                return Sample((0.0, 0.0, 0.0), False)
            total += weight * img.pixels[row, col]

    return Sample((float(total[0]), float(total[1]), float(total[2])), True)
