"""Configuration for panosynth: process settings and job parameters."""

import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from panosynth.geometry.cylproj import SYNTHIA_FOCAL_LENGTH
from panosynth.geometry.regmatch import MatchConfig
from panosynth.geometry.stitcher import DIRECTIONS, FOV_SPLITS, SPLIT_ALIGN
from panosynth.imaging.models import NUM_CLASSES, RESERVED_CLASSES, ConfigError
from panosynth.util.yaml_util import load_config_file

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    """Process settings loaded from environment variables with PANOSYNTH_ prefix."""

    log_level: str = "INFO"
    transport: str = "stdio"
    host: str = "0.0.0.0"
    port: int = 8099
    job_config: Path | None = None

    model_config = SettingsConfigDict(env_prefix="PANOSYNTH_")

    @field_validator("transport")
    @classmethod
    def validate_transport(cls, v: str) -> str:
        allowed = {"stdio", "http", "sse"}
        if v not in allowed:
            raise ValueError(
                f"Invalid transport '{v}'. Must be one of: {', '.join(sorted(allowed))}"
            )
        return v

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        if v.upper() not in {"DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"}:
            raise ValueError(f"Invalid log level '{v}'")
        return v.upper()


class JobConfig(BaseSettings):
    """Every tunable parameter of a batch job.

    Values come from flags, then a JSON/YAML config file, then
    PANOSYNTH_JOB_* environment variables, then these defaults. Unknown keys
    are rejected.
    """

    # projection
    f: float = SYNTHIA_FOCAL_LENGTH
    r: float | None = None

    # calibration; d=None means estimate it by region matching
    d: int | None = None
    x_c1: int = 1075
    region_width: int = 9
    region_rows: tuple[int, int] | None = None
    scan_start: int | None = None
    scan_stop: int | None = None
    spread_threshold: float = 4.0
    order: list[str] = list(DIRECTIONS)
    fov_per_image: float = 100.0

    # dataset outputs
    resize_width: int = 3328
    resize_height: int = 768
    splits: list[int] = [90, 180, 360]
    distortion_focal_lengths: list[float] = [700.0, 600.0, 500.0, 400.0]
    distort_directions: list[str] = ["forward"]
    view_directions: list[str] = []
    view_width: int = 1280
    view_height: int = 768
    dedup_threshold: float = 1.0
    seed: int = 0

    # labels and metrics
    ignore_classes: list[int] = list(RESERVED_CLASSES)
    void_class: int = 15
    palette_path: Path | None = None

    jobs: int = 1

    model_config = SettingsConfigDict(env_prefix="PANOSYNTH_JOB_", extra="forbid")

    @field_validator("f", "fov_per_image", "resize_width", "resize_height", "view_width", "view_height", "jobs")
    @classmethod
    def validate_positive(cls, v: float) -> float:
        if not v > 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    @field_validator("r", "d")
    @classmethod
    def validate_optional_positive(cls, v: float | None) -> float | None:
        if v is not None and not v > 0:
            raise ValueError(f"must be > 0, got {v}")
        return v

    @field_validator("region_width")
    @classmethod
    def validate_region_width(cls, v: int) -> int:
        if v < 1 or v % 2 == 0:
            raise ValueError(f"region_width must be odd and >= 1, got {v}")
        return v

    @field_validator("splits")
    @classmethod
    def validate_splits(cls, v: list[int]) -> list[int]:
        bad = [s for s in v if s not in FOV_SPLITS]
        if bad:
            raise ValueError(f"unsupported FoV splits {bad}; allowed: {sorted(FOV_SPLITS)}")
        return v

    @field_validator("distortion_focal_lengths")
    @classmethod
    def validate_focal_lengths(cls, v: list[float]) -> list[float]:
        if any(not f > 0 for f in v):
            raise ValueError(f"focal lengths must be > 0, got {v}")
        return v

    @field_validator("order")
    @classmethod
    def validate_order(cls, v: list[str]) -> list[str]:
        if sorted(v) != sorted(DIRECTIONS):
            raise ValueError(f"order must be a permutation of {list(DIRECTIONS)}, got {v}")
        return v

    @field_validator("distort_directions", "view_directions")
    @classmethod
    def validate_directions(cls, v: list[str]) -> list[str]:
        bad = [d for d in v if d not in DIRECTIONS]
        if bad:
            raise ValueError(f"unknown directions {bad}")
        return v

    @field_validator("ignore_classes")
    @classmethod
    def validate_classes(cls, v: list[int]) -> list[int]:
        if any(not 0 <= c < NUM_CLASSES for c in v):
            raise ValueError(f"class indices must be within 0..{NUM_CLASSES - 1}, got {v}")
        return v

    @field_validator("void_class")
    @classmethod
    def validate_void_class(cls, v: int) -> int:
        if not 0 <= v < NUM_CLASSES:
            raise ValueError(f"void_class must be within 0..{NUM_CLASSES - 1}, got {v}")
        return v

    @model_validator(mode="after")
    def validate_geometry(self) -> "JobConfig":
        if 4 * self.fov_per_image < 360:
            raise ValueError(f"four images of {self.fov_per_image} degrees cannot cover 360 degrees")
        for fov in self.splits:
            step = FOV_SPLITS[fov] * SPLIT_ALIGN
            if self.resize_width % step:
                raise ValueError(
                    f"resize_width {self.resize_width} cannot be split for FoV {fov}: must be a multiple of {step}"
                )
        return self

    @property
    def radius(self) -> float:
        """Cylinder radius, r = f unless set."""
        return self.r if self.r is not None else self.f

    @property
    def scan_range(self) -> tuple[int, int] | None:
        if self.scan_start is None and self.scan_stop is None:
            return None
        return (self.scan_start or 0, self.scan_stop if self.scan_stop is not None else 10**9)

    def match_config(self) -> MatchConfig:
        return MatchConfig(
            x_c1=self.x_c1,
            region_width=self.region_width,
            region_rows=self.region_rows,
            scan_range=self.scan_range,
        )


def load_job_config(path: str | Path | None = None, overrides: dict[str, Any] | None = None) -> JobConfig:
    """Build a JobConfig from an optional config file plus flag overrides (flags win).

    Raises ConfigError on unreadable files, unknown keys or invalid values.
    """
    values: dict[str, Any] = {}
    if path is not None:
        values.update(load_config_file(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    try:
        return JobConfig(**values)
    except ValidationError as exc:
        raise ConfigError(f"Invalid job configuration: {exc}") from exc


settings = Settings()
