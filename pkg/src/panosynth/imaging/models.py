"""Image containers, palette model and the panosynth exception hierarchy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from pydantic import BaseModel, Field, field_validator

NUM_CLASSES = 16
FILL_COLOR = (0, 0, 0)
RESERVED_CLASSES = (14, 15)


# ---------------------------------------------------------------------------
# Exceptions
# ---------------------------------------------------------------------------


class PanoError(Exception):
    """Base exception for panosynth errors."""


class ConfigError(PanoError):
    """A job parameter or configuration file is invalid."""


class SequenceLayoutError(ConfigError):
    """An input sequence directory does not follow the expected layout."""


class ImageIOError(PanoError):
    """Reading or writing an image file failed."""


class ImageNotFoundError(ImageIOError):
    """The image file does not exist."""


class UnsupportedFormatError(ImageIOError):
    """The file is not a supported lossless raster format."""


class CorruptImageError(ImageIOError):
    """The file looks like a supported format but cannot be decoded."""


class LabelError(PanoError):
    """A label image holds values outside the label space."""


class PaletteMismatchError(LabelError):
    """An RGB label pixel has no matching palette entry."""


class LabelRangeError(LabelError):
    """A class index is >= NUM_CLASSES."""


class DimensionError(PanoError):
    """Image dimensions or pixel offsets do not fit the operation."""


class ProjectionSingularityError(PanoError):
    """A cylinder coordinate sits on the tangent singularity |x'| >= r*pi/2."""


class MatchError(PanoError):
    """Region matching failed."""


class RegionError(MatchError):
    """A matching region has the wrong shape or contains invalid pixels."""


class EmptyCandidateError(MatchError):
    """No candidate column of the scan range is fully valid."""


class StitchCoverageError(PanoError):
    """The stitched panorama has holes (d is too large for the rig overlap)."""


class UnsupportedFovError(PanoError):
    """The requested FoV split is not one of 90, 180 or 360 degrees."""


class EmptyMatrixError(PanoError):
    """No pixels were counted, so the metric is undefined."""


# ---------------------------------------------------------------------------
# Image containers
# ---------------------------------------------------------------------------


def _freeze(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


def _coerce_mask(valid: np.ndarray | None, shape: tuple[int, int]) -> np.ndarray:
    if valid is None:
        return np.ones(shape, dtype=bool)
    mask = np.asarray(valid, dtype=bool)
    if mask.shape != shape:
        raise DimensionError(f"validity mask shape {mask.shape} does not match image {shape}")
    return mask


@dataclass(frozen=True, eq=False)
class Raster:
    """Interleaved 8-bit RGB image with a per-pixel validity mask.

    ``pixels`` has shape (height, width, 3). Invalid pixels always hold
    FILL_COLOR; the constructor enforces this so warped margins compare equal
    no matter how they were produced.
    """

    pixels: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self) -> None:
        pixels = np.asarray(self.pixels)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise DimensionError(f"Raster pixels must have shape (H, W, 3), got {pixels.shape}")
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise DimensionError("Raster must be at least 1x1")
        pixels = pixels.astype(np.uint8, copy=False)
        mask = _coerce_mask(self.valid, pixels.shape[:2])
        if not mask.all() and pixels[~mask].any():
            pixels = pixels.copy()
            pixels[~mask] = FILL_COLOR
        object.__setattr__(self, "pixels", _freeze(pixels))
        object.__setattr__(self, "valid", _freeze(mask))

    @classmethod
    def blank(cls, width: int, height: int) -> Raster:
        """Return an all-invalid canvas."""
        return cls(np.zeros((height, width, 3), dtype=np.uint8), np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> np.ndarray:
        return self.pixels

    def with_data(self, data: np.ndarray, valid: np.ndarray | None = None) -> Raster:
        return Raster(data, valid)

    def crop(self, x0: int, x1: int, y0: int = 0, y1: int | None = None) -> Raster:
        """Return columns [x0, x1) and rows [y0, y1)."""
        y1 = self.height if y1 is None else y1
        _check_window(self, x0, x1, y0, y1)
        return Raster(self.pixels[y0:y1, x0:x1].copy(), self.valid[y0:y1, x0:x1].copy())


@dataclass(frozen=True, eq=False)
class LabelMap:
    """Single-channel class-index image with a per-pixel validity mask."""

    classes: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self) -> None:
        classes = np.asarray(self.classes)
        if classes.ndim != 2:
            raise DimensionError(f"LabelMap classes must have shape (H, W), got {classes.shape}")
        if classes.shape[0] < 1 or classes.shape[1] < 1:
            raise DimensionError("LabelMap must be at least 1x1")
        if classes.size and int(classes.max()) >= NUM_CLASSES:
            raise LabelRangeError(f"class index {int(classes.max())} is outside 0..{NUM_CLASSES - 1}")
        if classes.size and int(classes.min()) < 0:
            raise LabelRangeError(f"class index {int(classes.min())} is negative")
        classes = classes.astype(np.uint8, copy=False)
        mask = _coerce_mask(self.valid, classes.shape)
        object.__setattr__(self, "classes", _freeze(classes))
        object.__setattr__(self, "valid", _freeze(mask))

    @classmethod
    def blank(cls, width: int, height: int) -> LabelMap:
        return cls(np.zeros((height, width), dtype=np.uint8), np.zeros((height, width), dtype=bool))

    @property
    def width(self) -> int:
        return self.classes.shape[1]

    @property
    def height(self) -> int:
        return self.classes.shape[0]

    @property
    def data(self) -> np.ndarray:
        return self.classes

    def with_data(self, data: np.ndarray, valid: np.ndarray | None = None) -> LabelMap:
        return LabelMap(data, valid)

    def crop(self, x0: int, x1: int, y0: int = 0, y1: int | None = None) -> LabelMap:
        y1 = self.height if y1 is None else y1
        _check_window(self, x0, x1, y0, y1)
        return LabelMap(self.classes[y0:y1, x0:x1].copy(), self.valid[y0:y1, x0:x1].copy())

    def present_classes(self) -> set[int]:
        """Class indices found on valid pixels."""
        return {int(c) for c in np.unique(self.classes[self.valid])}


Image = Union[Raster, LabelMap]


def _check_window(img: Image, x0: int, x1: int, y0: int, y1: int) -> None:
    if not (0 <= x0 < x1 <= img.width and 0 <= y0 < y1 <= img.height):
        raise DimensionError(
            f"window x[{x0}:{x1}] y[{y0}:{y1}] is outside a {img.width}x{img.height} image"
        )


def check_pair(rgb: Raster, labels: LabelMap | None) -> None:
    """Raise DimensionError unless a Raster/LabelMap pair has equal size."""
    if labels is not None and (labels.width, labels.height) != (rgb.width, rgb.height):
        raise DimensionError(
            f"label map {labels.width}x{labels.height} does not match image {rgb.width}x{rgb.height}"
        )


# ---------------------------------------------------------------------------
# Palette
# ---------------------------------------------------------------------------


class PaletteEntry(BaseModel):
    index: int = Field(ge=0, lt=NUM_CLASSES)
    name: str
    rgb: tuple[int, int, int]

    @field_validator("rgb")
    @classmethod
    def validate_rgb(cls, v: tuple[int, int, int]) -> tuple[int, int, int]:
        if any(not 0 <= c <= 255 for c in v):
            raise ValueError(f"rgb components must be within 0..255, got {v}")
        return v


class Palette(BaseModel):
    """Mapping from the 16 class indices to display colours and names."""

    entries: list[PaletteEntry]

    @field_validator("entries")
    @classmethod
    def validate_entries(cls, v: list[PaletteEntry]) -> list[PaletteEntry]:
        if len(v) != NUM_CLASSES:
            raise ValueError(f"palette needs exactly {NUM_CLASSES} entries, got {len(v)}")
        v = sorted(v, key=lambda e: e.index)
        if [e.index for e in v] != list(range(NUM_CLASSES)):
            raise ValueError("palette indices must cover 0..15 exactly once")
        colors = [e.rgb for e in v]
        if len(set(colors)) != NUM_CLASSES:
            raise ValueError("palette colours must be distinct")
        return v

    @property
    def colors(self) -> np.ndarray:
        """(16, 3) uint8 array, row i is the colour of class i."""
        return np.array([e.rgb for e in self.entries], dtype=np.uint8)

    @property
    def names(self) -> list[str]:
        return [e.name for e in self.entries]

    def index_of(self, name: str) -> int:
        for entry in self.entries:
            if entry.name == name:
                return entry.index
        raise KeyError(f"no palette class named '{name}'")
