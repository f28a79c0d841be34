"""``panosynth match``: estimate d by region matching."""

import argparse
from pathlib import Path

from panosynth.commands.common import add_camera_arguments, add_match_arguments, emit_json, job_from_args
from panosynth.geometry.files import match_files
from panosynth.util.dry_run import render_plan


def run_match(args: argparse.Namespace) -> int:
    job = job_from_args(args)
    if args.dry_run:
        print(render_plan(
            "match",
            job,
            {"images": [str(p) for p in args.images]},
            {"csv": str(args.csv) if args.csv else None},
        ))
        return 0
    emit_json(match_files(args.images, job, args.csv))
    return 0


def register_match_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "match", parents=[common], help="Estimate d from adjacent planar images (left then right)"
    )
    parser.add_argument("images", type=Path, nargs="+", help="Two adjacent images, or four in rig order")
    parser.add_argument("--csv", type=Path, help="Write the discrepancy curve as CSV")
    add_camera_arguments(parser)
    add_match_arguments(parser)
    parser.set_defaults(handler=run_match)
