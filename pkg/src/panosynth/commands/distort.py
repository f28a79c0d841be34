"""``panosynth distort``: cylindrical distortion series of planar image pairs."""

import argparse
import logging
from pathlib import Path

from panosynth.commands.common import job_from_args, palette_for, png_files
from panosynth.dataset.layout import format_focal
from panosynth.dataset.pipeline import DistortionSpec, build_distortion_series
from panosynth.imaging.io import load_image, load_labels, save_image, save_labels
from panosynth.imaging.models import ImageNotFoundError
from panosynth.util.dry_run import render_plan

logger = logging.getLogger(__name__)


def run_distort(args: argparse.Namespace) -> int:
    job = job_from_args(args)
    palette = palette_for(job)
    sources = png_files(args.rgb_dir)
    for src in sources:
        if not (args.labels_dir / src.name).is_file():
            raise ImageNotFoundError(f"no label map {args.labels_dir / src.name} for {src}")

    groups = {f: args.out / f"distort_f{format_focal(f)}" for f in job.distortion_focal_lengths}
    if args.dry_run:
        print(render_plan(
            "distort",
            job,
            {"rgb": str(args.rgb_dir), "labels": str(args.labels_dir), "images": len(sources)},
            {"groups": {format_focal(f): str(p) for f, p in groups.items()}},
        ))
        return 0

    pairs = [(load_image(src), load_labels(args.labels_dir / src.name, palette)) for src in sources]
    series = build_distortion_series(pairs, DistortionSpec(tuple(job.distortion_focal_lengths)))
    for f, group in series.items():
        for src, (rgb, labels) in zip(sources, group):
            save_image(groups[f] / "rgb" / src.name, rgb)
            save_labels(groups[f] / "labels" / src.name, labels, palette, job.void_class)
        logger.info("f=%s: %d pair(s) written to %s", format_focal(f), len(group), groups[f])
    return 0


def register_distort_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "distort", parents=[common], help="Warp image/label pairs at several focal lengths"
    )
    parser.add_argument("rgb_dir", type=Path, help="Directory of planar RGB PNGs")
    parser.add_argument("labels_dir", type=Path, help="Directory of label PNGs with the same names")
    parser.add_argument("out", type=Path, help="Output root for distort_f<F>/{rgb,labels}")
    parser.add_argument(
        "--focal-lengths", dest="distortion_focal_lengths", type=float, nargs="*", help="Default 700 600 500 400"
    )
    parser.set_defaults(handler=run_distort)
