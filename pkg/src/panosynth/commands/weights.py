"""``panosynth weights``: median-frequency class weights of a label set."""

import argparse
from pathlib import Path

from panosynth.commands.common import emit_json, job_from_args, palette_for
from panosynth.metrics.report import label_files, weights_for_directory, write_report_json
from panosynth.util.dry_run import render_plan


def run_weights(args: argparse.Namespace) -> int:
    job = job_from_args(args)
    palette = palette_for(job)
    if args.dry_run:
        print(render_plan(
            "weights",
            job,
            {"labels": str(args.labels), "files": len(label_files(args.labels))},
            {"json": str(args.json) if args.json else None},
        ))
        return 0

    report = weights_for_directory(args.labels, palette, job.ignore_classes)
    if args.json:
        write_report_json(report, args.json)
    emit_json(report.model_dump())
    return 0


def register_weights_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("weights", parents=[common], help="Median-frequency class weights")
    parser.add_argument("labels", type=Path, help="Directory searched recursively for label PNGs")
    parser.add_argument("--ignore", dest="ignore_classes", type=int, nargs="*", help="Classes given weight 0")
    parser.add_argument("--json", type=Path, help="Write the weights report as JSON")
    parser.set_defaults(handler=run_weights)
