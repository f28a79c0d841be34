"""``panosynth dataset``: build a panoramic dataset from sequence directories."""

import argparse
import logging
from pathlib import Path

from panosynth.commands.common import (
    EXIT_PROCESSING,
    add_camera_arguments,
    add_match_arguments,
    emit_json,
    job_from_args,
    palette_for,
)
from panosynth.dataset.layout import discover_sequences
from panosynth.dataset.pipeline import audit_manifest, build_dataset
from panosynth.util.dry_run import render_plan

logger = logging.getLogger(__name__)


def run_dataset(args: argparse.Namespace) -> int:
    job = job_from_args(args)
    palette = palette_for(job)

    if args.dry_run:
        sequences = discover_sequences(args.root, args.sequences)
        print(render_plan(
            "dataset",
            job,
            {"root": str(args.root), "sequences": {s.name: len(s.frame_ids) for s in sequences}},
            {"directory": str(args.out), "manifest": str(args.out / "manifest.json")},
            notes=None if job.d is not None else ["d will be estimated per sequence by region matching"],
        ))
        return 0

    manifest = build_dataset(args.root, args.out, job, palette, args.sequences)
    audit = audit_manifest(manifest, args.out)
    emit_json({
        "sequences": {
            s.name: {"full": s.full_count, "kept": s.kept_count, "failed": len(s.failures), "d": s.calibration.d}
            for s in manifest.sequences
        },
        "outputs": manifest.output_count,
        "failed_sequences": {s.name: s.error for s in manifest.failed_sequences},
        "missing": audit.missing,
        "unlisted": audit.unlisted,
    })
    if not audit.clean or manifest.has_failures:
        return EXIT_PROCESSING
    return 0


def register_dataset_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("dataset", parents=[common], help="Build a panoramic dataset")
    parser.add_argument("root", type=Path, help="Input root: <seq>/<direction>/{rgb,labels}/<frame>.png")
    parser.add_argument("out", type=Path, help="Output root")
    parser.add_argument("--sequences", nargs="+", help="Only these sequence names")
    parser.add_argument("--splits", type=int, nargs="*", help="FoV splits (90 180 360)")
    parser.add_argument("--dedup-threshold", type=float, help="Mean discrepancy below which frames are dropped")
    parser.add_argument("--resize", dest="resize", type=int, nargs=2, metavar=("W", "H"))
    add_camera_arguments(parser, with_d=True)
    add_match_arguments(parser)
    parser.set_defaults(handler=run_dataset)
