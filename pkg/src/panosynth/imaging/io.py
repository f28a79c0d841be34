"""PNG reading and writing for rasters, label maps and palettes."""

from __future__ import annotations

import json
import logging
from importlib import resources
from pathlib import Path

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError
from pydantic import ValidationError

from panosynth.imaging.models import (
    NUM_CLASSES,
    ConfigError,
    CorruptImageError,
    ImageIOError,
    ImageNotFoundError,
    LabelMap,
    LabelRangeError,
    Palette,
    PaletteMismatchError,
    Raster,
    UnsupportedFormatError,
)

logger = logging.getLogger(__name__)

LOSSLESS_FORMATS = {"PNG", "BMP", "TIFF", "PPM"}

# Leading bytes of the lossless formats, used to tell a damaged file from a foreign one.
_MAGIC = (
    b"\x89PNG\r\n\x1a\n",
    b"BM",
    b"II*\x00",
    b"MM\x00*",
    b"P6",
)


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------


def _open(path: str | Path) -> PILImage.Image:
    """Open and fully decode a lossless image, translating failures.

    Raises ImageNotFoundError, UnsupportedFormatError or CorruptImageError.
    """
    path = Path(path)
    if not path.is_file():
        raise ImageNotFoundError(f"Image not found: {path}")

    with path.open("rb") as fh:
        head = fh.read(8)
    known = any(head.startswith(magic) for magic in _MAGIC)

    try:
        img = PILImage.open(path)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        # damaged headers surface as OSError from the decoder plugins
        if known:
            raise CorruptImageError(f"Cannot decode {path}: {exc}") from exc
        raise UnsupportedFormatError(f"Unsupported image format: {path}") from exc

    if img.format not in LOSSLESS_FORMATS:
        img.close()
        raise UnsupportedFormatError(f"{path} is {img.format}; only lossless formats are accepted")

    try:
        img.load()
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"Corrupt image data in {path}: {exc}") from exc
    return img


def _prepare(path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# Palette
# ---------------------------------------------------------------------------


def load_palette(path: str | Path | None = None) -> Palette:
    """Load a palette JSON file; ``None`` loads the bundled default."""
    try:
        if path is None:
            text = resources.files("panosynth.imaging").joinpath("default_palette.json").read_text()
        else:
            text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"Cannot read palette {path}: {exc}") from exc

    try:
        return Palette(entries=json.loads(text))
    except (json.JSONDecodeError, ValidationError) as exc:
        raise ConfigError(f"Invalid palette {path or 'default_palette.json'}: {exc}") from exc


def _rgb_keys(rgb: np.ndarray) -> np.ndarray:
    rgb = rgb.astype(np.int32)
    return (rgb[..., 0] << 16) | (rgb[..., 1] << 8) | rgb[..., 2]


def invert_palette(rgb: np.ndarray, palette: Palette) -> np.ndarray:
    """Map an (H, W, 3) colour rendering back to class indices."""
    keys = _rgb_keys(rgb)
    palette_keys = _rgb_keys(palette.colors)
    order = np.argsort(palette_keys)
    sorted_keys = palette_keys[order]

    pos = np.clip(np.searchsorted(sorted_keys, keys), 0, NUM_CLASSES - 1)
    matched = sorted_keys[pos] == keys
    if not matched.all():
        row, col = np.argwhere(~matched)[0]
        color = tuple(int(c) for c in rgb[row, col])
        raise PaletteMismatchError(
            f"pixel ({col}, {row}) has colour {color} which is not in the palette"
        )
    return order[pos].astype(np.uint8)


def render_labels(labels: LabelMap, palette: Palette) -> Raster:
    """Colour a label map through the palette (invalid pixels stay invalid)."""
    return Raster(palette.colors[labels.classes], labels.valid)


# ---------------------------------------------------------------------------
# Rasters
# ---------------------------------------------------------------------------


def load_image(path: str | Path) -> Raster:
    """Load an 8-bit RGB image; every pixel is valid.

    RGBA files are accepted and their zero-alpha pixels become invalid.
    """
    img = _open(path)
    try:
        if img.mode == "RGBA":
            arr = np.asarray(img)
            return Raster(arr[..., :3], arr[..., 3] > 0)
        if img.mode in ("RGB", "L", "P"):
            return Raster(np.asarray(img.convert("RGB")))
        raise UnsupportedFormatError(f"{path} has pixel mode {img.mode}; expected 8-bit RGB")
    finally:
        img.close()


def save_image(path: str | Path, raster: Raster) -> Path:
    """Write a raster as PNG. Invalid pixels are already FILL_COLOR."""
    path = _prepare(path)
    try:
        PILImage.fromarray(np.ascontiguousarray(raster.pixels)).save(path, format="PNG")
    except OSError as exc:
        raise ImageIOError(f"Cannot write {path}: {exc}") from exc
    logger.debug("Wrote %s", path)
    return path


# ---------------------------------------------------------------------------
# Label maps
# ---------------------------------------------------------------------------


def load_labels(path: str | Path, palette: Palette) -> LabelMap:
    """Load a label map from index data (grayscale/paletted) or an RGB rendering."""
    img = _open(path)
    try:
        if img.mode in ("L", "P"):
            classes = np.asarray(img)
            if classes.size and int(classes.max()) >= NUM_CLASSES:
                raise LabelRangeError(
                    f"{path} contains class index {int(classes.max())}; expected < {NUM_CLASSES}"
                )
            return LabelMap(classes)
        if img.mode in ("RGB", "RGBA"):
            return LabelMap(invert_palette(np.asarray(img.convert("RGB")), palette))
        raise UnsupportedFormatError(f"{path} has pixel mode {img.mode}; expected index or RGB labels")
    finally:
        img.close()


def save_labels(path: str | Path, labels: LabelMap, palette: Palette, void_class: int = 15) -> Path:
    """Write a label map as a paletted PNG.

    Pixel values are class indices and the PNG palette carries the display
    colours, so the file is both index data and a viewable rendering.
    Invalid pixels are written as ``void_class``.
    """
    path = _prepare(path)
    classes = np.array(labels.classes, dtype=np.uint8)
    classes[~labels.valid] = void_class
    img = PILImage.fromarray(classes)
    img.putpalette(palette.colors.flatten().tolist())
    try:
        img.save(path, format="PNG")
    except OSError as exc:
        raise ImageIOError(f"Cannot write {path}: {exc}") from exc
    logger.debug("Wrote %s", path)
    return path


def save_label_rendering(path: str | Path, labels: LabelMap, palette: Palette) -> Path:
    """Write the RGB colour rendering of a label map."""
    return save_image(path, render_labels(labels, palette))
