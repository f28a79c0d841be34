"""Synthetic four-camera rigs cut from a cylindrical strip.

The strip is the unrolled cylinder: its width is the circumference
``2*pi*r`` and column ``k*width/4`` faces camera k. Planar views are
rendered with the forward map, so warping them back reproduces the strip
and the true distance parameter is exactly ``width / 4``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import cv2
import numpy as np

from panosynth.geometry.cylproj import CylindricalCamera, forward_arrays
from panosynth.imaging.models import ConfigError, Raster


@dataclass(frozen=True)
class SyntheticRig:
    strip: Raster
    views: tuple[Raster, ...]
    cam: CylindricalCamera
    d: int

    def strip_column(self, panorama_column: int | np.ndarray) -> int | np.ndarray:
        """Strip column seen at a panorama column (panorama origin = band start of view 0)."""
        start, _ = self.cam.valid_band()
        return (panorama_column + start - self.cam.center_x) % self.strip.width


def smooth_strip(
    width: int,
    height: int,
    rng: np.random.Generator,
    components: int = 24,
    max_cycles: int = 60,
) -> Raster:
    """A horizontally periodic, smooth random RGB strip.

    Each channel is a sum of sinusoids with integer horizontal frequency, so
    the strip closes seamlessly at column ``width``. At most ``max_cycles``
    periods span the width and three the height.
    """
    cols = np.arange(width, dtype=np.float64)[None, :]
    rows = np.arange(height, dtype=np.float64)[:, None]
    channels = []
    for _ in range(3):
        acc = np.zeros((height, width))
        for _ in range(components):
            kx = rng.integers(1, max_cycles + 1)
            wy = rng.uniform(0.0, 3.0) * 2 * math.pi / height
            amp = rng.uniform(5.0, 20.0)
            acc += amp * np.sin(2 * math.pi * kx * cols / width + rng.uniform(0, 2 * math.pi)) * np.cos(
                wy * rows + rng.uniform(0, 2 * math.pi)
            )
        acc = acc / max(1.0, np.abs(acc).max()) * 110.0 + 128.0
        channels.append(acc)
    return Raster(np.clip(np.rint(np.stack(channels, axis=-1)), 0, 255).astype(np.uint8))


def render_planar_view(strip: Raster, cam: CylindricalCamera, center_column: float) -> Raster:
    """Render the planar image a camera facing ``center_column`` of the strip sees."""
    cols = np.arange(cam.width, dtype=np.float64) - cam.center_x
    rows = np.arange(cam.height, dtype=np.float64) - cam.center_y
    x, y = np.meshgrid(cols, rows)
    xp, yp = forward_arrays(x, y, cam)

    map_x = np.mod(center_column + xp, strip.width).astype(np.float32)
    map_y = np.clip(yp + (strip.height - 1) / 2, 0, strip.height - 1).astype(np.float32)
    pixels = cv2.remap(strip.pixels, map_x, map_y, cv2.INTER_LINEAR, borderMode=cv2.BORDER_WRAP)
    return Raster(pixels)


def make_rig(strip: Raster, fov_deg: float = 100.0) -> SyntheticRig:
    """Cut four views of ``fov_deg`` horizontal FoV, one per quarter turn."""
    if strip.width % 4:
        raise ConfigError(f"strip width {strip.width} must be divisible by 4")
    f = strip.width / (2 * math.pi)
    width = 2 * round(f * math.tan(math.radians(fov_deg) / 2))
    cam = CylindricalCamera(f=f, width=width, height=strip.height)
    d = strip.width // 4
    views = tuple(render_planar_view(strip, cam, k * d) for k in range(4))
    return SyntheticRig(strip=strip, views=views, cam=cam, d=d)
