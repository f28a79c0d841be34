"""``panosynth stitch``: one rig frame to a panorama plus sidecar."""

import argparse
import logging
from pathlib import Path

from panosynth.commands.common import add_camera_arguments, add_match_arguments, job_from_args, palette_for
from panosynth.geometry.files import stitch_files
from panosynth.util.dry_run import render_plan

logger = logging.getLogger(__name__)


def run_stitch(args: argparse.Namespace) -> int:
    job = job_from_args(args)
    palette = palette_for(job)
    if args.dry_run:
        print(render_plan(
            "stitch",
            job,
            {"rgb": [str(p) for p in args.rgb], "labels": [str(p) for p in args.labels or []]},
            {"directory": str(args.out), "name": args.name},
            notes=None if job.d is not None else ["d will be estimated by region matching"],
        ))
        return 0

    sidecar = stitch_files(args.rgb, args.out, job, palette, args.labels, args.name, args.require_full)
    logger.info("Panorama %dx%d written to %s", sidecar["width"], sidecar["height"], args.out)
    return 0


def register_stitch_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("stitch", parents=[common], help="Stitch one rig frame into a panorama")
    parser.add_argument("--rgb", type=Path, nargs=4, required=True, metavar="PNG", help="Images in rig order")
    parser.add_argument("--labels", type=Path, nargs=4, metavar="PNG", help="Label maps in rig order")
    parser.add_argument("--out", type=Path, required=True, help="Output directory")
    parser.add_argument("--name", default="pano", help="Output file stem")
    parser.add_argument("--require-full", action="store_true", help="Fail on any invalid panorama pixel")
    add_camera_arguments(parser, with_d=True)
    add_match_arguments(parser)
    parser.set_defaults(handler=run_stitch)
