"""Region matching: estimate the distance parameter d between adjacent warped images.

A narrow reference region R1 centred on column ``x_c1`` of the left image is
slid along the right image. At each candidate column ``x_c2`` the L1
discrepancy Dv(R1, R2) = sum |p - q| is evaluated, and the minimum gives
``d = x_c1 - x_c2``.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from panosynth.imaging.models import (
    ConfigError,
    DimensionError,
    EmptyCandidateError,
    Raster,
    RegionError,
)

logger = logging.getLogger(__name__)

DEFAULT_REGION_WIDTH = 9
DEFAULT_SPREAD_THRESHOLD = 4.0


@dataclass(frozen=True)
class MatchConfig:
    """Reference region and scan window.

    ``region_rows`` is a half-open row range; ``None`` selects every row on
    which the reference region is fully valid. ``scan_range`` is an inclusive
    column interval; ``None`` scans every column a region fits around.
    """

    x_c1: int = 1075
    region_width: int = DEFAULT_REGION_WIDTH
    region_rows: tuple[int, int] | None = None
    scan_range: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.region_width < 1 or self.region_width % 2 == 0:
            raise ConfigError(f"region_width must be odd and >= 1, got {self.region_width}")
        if self.region_rows is not None and self.region_rows[0] >= self.region_rows[1]:
            raise ConfigError(f"region_rows {self.region_rows} is empty")
        if self.scan_range is not None and self.scan_range[0] > self.scan_range[1]:
            raise ConfigError(f"scan_range {self.scan_range} is empty")

    @property
    def half_width(self) -> int:
        return self.region_width // 2


@dataclass(frozen=True)
class MatchCurve:
    """Discrepancy of every evaluated candidate column, plus the argmin."""

    x_c1: int
    candidates: tuple[tuple[int, int], ...]
    best_x_c2: int
    rows: tuple[int, int]

    @property
    def d(self) -> int:
        return self.x_c1 - self.best_x_c2

    @property
    def min_dv(self) -> int:
        return min(dv for _, dv in self.candidates)

    def dv_at(self, x_c2: int) -> int | None:
        for col, dv in self.candidates:
            if col == x_c2:
                return dv
        return None

    def to_csv(self, path: str | Path) -> Path:
        """Write the curve as ``x_c2,dv`` rows for plotting."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x_c2", "dv"])
            writer.writerows(self.candidates)
        return path


@dataclass(frozen=True)
class RigEstimate:
    d: int
    curves: tuple[MatchCurve, ...]
    pair_d: tuple[int, ...] = field(default=())
    spread: int = 0
    calibration_warning: str | None = None


# ---------------------------------------------------------------------------
# Discrepancy
# ---------------------------------------------------------------------------


def _region_array(region: Raster | np.ndarray) -> np.ndarray:
    if isinstance(region, Raster):
        if not region.valid.all():
            raise RegionError("region contains invalid pixels")
        return region.pixels
    return np.asarray(region)


def discrepancy(r1: Raster | np.ndarray, r2: Raster | np.ndarray) -> int:
    """Dv(R1, R2): sum of absolute per-channel differences.

    Regions may be Rasters (which must be fully valid) or plain arrays of
    equal shape, grey or RGB.
    """
    a = _region_array(r1)
    b = _region_array(r2)
    if a.shape != b.shape:
        raise RegionError(f"region shapes differ: {a.shape} vs {b.shape}")
    return int(np.abs(a.astype(np.int64) - b.astype(np.int64)).sum())


# ---------------------------------------------------------------------------
# Scanning
# ---------------------------------------------------------------------------


def _valid_rows(i1: Raster, x0: int, x1: int) -> tuple[int, int]:
    """Largest run of rows around the centre on which columns [x0, x1) are all valid."""
    ok = i1.valid[:, x0:x1].all(axis=1)
    if ok.all():
        return 0, i1.height
    centre = i1.height // 2
    if not ok[centre]:
        raise RegionError(f"reference region at columns {x0}..{x1 - 1} is invalid at the centre row")
    top = centre
    while top > 0 and ok[top - 1]:
        top -= 1
    bottom = centre + 1
    while bottom < i1.height and ok[bottom]:
        bottom += 1
    return top, bottom


def scan_match(i1: Raster, i2: Raster, cfg: MatchConfig) -> MatchCurve:
    """Slide the reference region of ``i1`` across ``i2`` and minimise Dv.

    Candidates whose region contains an invalid pixel of ``i2`` are skipped,
    not scored. Ties resolve to the leftmost column.
    """
    if i1.height != i2.height:
        raise DimensionError(f"images differ in height: {i1.height} vs {i2.height}")

    h = cfg.half_width
    x0, x1 = cfg.x_c1 - h, cfg.x_c1 + h + 1
    if x0 < 0 or x1 > i1.width:
        raise RegionError(f"reference region around x_c1={cfg.x_c1} leaves the {i1.width}-wide image")

    if cfg.region_rows is None:
        rows = _valid_rows(i1, x0, x1)
    else:
        rows = cfg.region_rows
        if rows[0] < 0 or rows[1] > i1.height:
            raise RegionError(f"region_rows {rows} outside image height {i1.height}")
    y0, y1 = rows

    reference = i1.crop(x0, x1, y0, y1)
    if not reference.valid.all():
        raise RegionError(f"reference region around x_c1={cfg.x_c1} contains invalid pixels")
    ref = reference.pixels.astype(np.int16)

    lo, hi = cfg.scan_range if cfg.scan_range is not None else (h, i2.width - 1 - h)
    lo, hi = max(lo, h), min(hi, i2.width - 1 - h)

    pixels = i2.pixels[y0:y1].astype(np.int16)
    column_ok = i2.valid[y0:y1].all(axis=0)

    candidates: list[tuple[int, int]] = []
    for x_c2 in range(lo, hi + 1):
        if not column_ok[x_c2 - h : x_c2 + h + 1].all():
            continue
        window = pixels[:, x_c2 - h : x_c2 + h + 1]
        candidates.append((x_c2, int(np.abs(window - ref).sum())))

    if not candidates:
        raise EmptyCandidateError(
            f"no fully valid candidate region in columns {lo}..{hi} of the second image"
        )

    best_x_c2, best_dv = min(candidates, key=lambda c: (c[1], c[0]))
    logger.debug(
        "Scanned %d candidates for x_c1=%d: best x_c2=%d (Dv=%d)",
        len(candidates), cfg.x_c1, best_x_c2, best_dv,
    )
    return MatchCurve(cfg.x_c1, tuple(candidates), best_x_c2, rows)


def adjacent_pairs(images: Sequence[Raster]) -> list[tuple[Raster, Raster]]:
    """Pairs of neighbouring rig images around the ring, closing back to the first."""
    n = len(images)
    return [(images[k], images[(k + 1) % n]) for k in range(n)] if n > 1 else []


def estimate_rig_distance(
    pairs: Sequence[tuple[Raster, Raster]],
    cfg: MatchConfig,
    spread_threshold: float = DEFAULT_SPREAD_THRESHOLD,
) -> RigEstimate:
    """Match every adjacent pair and take the median d as the rig's d.

    Pairs disagreeing by more than ``spread_threshold`` pixels produce a
    calibration warning, not an error.
    """
    if not pairs:
        raise ConfigError("estimate_rig_distance needs at least one image pair")

    curves = tuple(scan_match(left, right, cfg) for left, right in pairs)
    ds = [c.d for c in curves]
    d = int(round(float(np.median(ds))))
    spread = max(ds) - min(ds)

    warning = None
    if spread > spread_threshold:
        warning = f"seam estimates {ds} spread {spread} px, more than {spread_threshold:g} px"
        logger.warning("Calibration: %s; using median d=%d", warning, d)
    else:
        logger.info("Estimated d=%d from %d seam(s) %s", d, len(ds), ds)

    return RigEstimate(d=d, curves=curves, pair_d=tuple(ds), spread=spread, calibration_warning=warning)
