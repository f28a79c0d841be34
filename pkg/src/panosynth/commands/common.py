"""Flags and helpers shared by every subcommand."""

import argparse
import json
import logging
from pathlib import Path
from typing import Any

from panosynth.config import JobConfig, load_job_config
from panosynth.imaging.io import load_palette
from panosynth.imaging.models import ConfigError, Palette

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_PROCESSING = 4


def common_parser() -> argparse.ArgumentParser:
    """Parent parser carrying the flags every subcommand accepts."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, help="JSON or YAML job config file")
    parser.add_argument("--seed", type=int, help="Seed for every random choice")
    parser.add_argument("--jobs", type=int, help="Worker threads for batch commands")
    parser.add_argument("--dry-run", action="store_true", help="Print the resolved plan without writing")
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        type=str.upper,
        help="Overrides PANOSYNTH_LOG_LEVEL",
    )
    parser.add_argument("--palette", dest="palette_path", type=Path, help="Palette JSON (default: bundled)")
    return parser


def add_camera_arguments(parser: argparse.ArgumentParser, *, with_d: bool = False) -> None:
    parser.add_argument("--f", type=float, help="Focal length in pixels")
    parser.add_argument("--r", type=float, help="Cylinder radius in pixels (default: f)")
    if with_d:
        parser.add_argument("--d", type=int, help="Distance parameter; estimated by region matching if unset")


def add_match_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--xc1", dest="x_c1", type=int, help="Reference region centre column")
    parser.add_argument("--region-width", type=int, help="Odd reference region width")
    parser.add_argument("--region-rows", type=int, nargs=2, metavar=("Y0", "Y1"), help="Half-open row range")
    parser.add_argument("--scan-start", type=int, help="First candidate column")
    parser.add_argument("--scan-stop", type=int, help="Last candidate column")


def job_from_args(args: argparse.Namespace) -> JobConfig:
    """Resolve the JobConfig: flags, then --config, then env, then defaults."""
    overrides = {name: getattr(args, name) for name in JobConfig.model_fields if hasattr(args, name)}
    if getattr(args, "resize", None):
        overrides["resize_width"], overrides["resize_height"] = args.resize
    return load_job_config(args.config, overrides)


def palette_for(job: JobConfig) -> Palette:
    return load_palette(job.palette_path)


def png_files(directory: Path) -> list[Path]:
    files = sorted(directory.glob("*.png"))
    if not files:
        raise ConfigError(f"no PNG files in {directory}")
    return files


def emit_json(data: Any) -> None:
    print(json.dumps(data, indent=2))
