"""``panosynth project``: warp planar images onto the cylinder."""

import argparse
from pathlib import Path

from panosynth.commands.common import add_camera_arguments, job_from_args, palette_for, png_files
from panosynth.geometry.files import warp_file
from panosynth.util.dry_run import render_plan


def run_project(args: argparse.Namespace) -> int:
    job = job_from_args(args)
    palette = palette_for(job)

    if args.input.is_dir():
        sources = png_files(args.input)
        pairs = [(src, args.output / src.name) for src in sources]
    else:
        pairs = [(args.input, args.output)]

    if args.dry_run:
        print(render_plan(
            "project",
            job,
            {"files": [str(s) for s, _ in pairs], "labels": args.labels},
            {"files": [str(d) for _, d in pairs]},
        ))
        return 0

    for src, dst in pairs:
        warp_file(src, dst, job, palette, labels=args.labels)
    return 0


def register_project_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser(
        "project", parents=[common], help="Warp an image or a directory of images onto the cylinder"
    )
    parser.add_argument("input", type=Path, help="Planar PNG or directory of PNGs")
    parser.add_argument("output", type=Path, help="Output PNG or directory")
    parser.add_argument("--labels", action="store_true", help="Inputs are label maps (nearest neighbour)")
    add_camera_arguments(parser)
    parser.set_defaults(handler=run_project)
