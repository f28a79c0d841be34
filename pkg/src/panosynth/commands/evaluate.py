"""``panosynth eval``: compare prediction label maps with ground truth."""

import argparse
import logging
from pathlib import Path

from panosynth.commands.common import emit_json, job_from_args, palette_for
from panosynth.metrics.report import (
    evaluate_directories,
    evaluate_series,
    series_report,
    write_report_csv,
    write_report_json,
)
from panosynth.util.dry_run import render_plan

logger = logging.getLogger(__name__)


def run_eval(args: argparse.Namespace) -> int:
    job = job_from_args(args)
    palette = palette_for(job)
    if args.dry_run:
        print(render_plan(
            "eval",
            job,
            {"gt": str(args.gt), "pred": str(args.pred), "series": args.series, "classes": args.classes},
            {"json": str(args.json) if args.json else None, "csv": str(args.csv) if args.csv else None},
        ))
        return 0

    if args.series:
        reports = evaluate_series(args.gt, args.pred, palette, job.ignore_classes, args.classes)
        series = series_report(reports)
        if args.json:
            write_report_json(series, args.json)
        emit_json({
            "series": [
                {"f": p.f, "miou": p.report.miou, "overall_accuracy": p.report.overall_accuracy}
                for p in series.points
            ]
        })
        return 0

    _, report = evaluate_directories(args.gt, args.pred, palette, job.ignore_classes, args.classes)
    if args.json:
        write_report_json(report, args.json)
    if args.csv:
        write_report_csv(report, args.csv)
    emit_json(report.model_dump())
    return 0


def register_eval_command(subparsers, common: argparse.ArgumentParser) -> None:
    parser = subparsers.add_parser("eval", parents=[common], help="mIoU and accuracy of predicted label maps")
    parser.add_argument("gt", type=Path, help="Ground-truth label directory (or series root with --series)")
    parser.add_argument("pred", type=Path, help="Prediction label directory, paired by file name")
    parser.add_argument("--series", action="store_true", help="Evaluate every distort_f<F>/labels group")
    parser.add_argument("--classes", nargs="+", help="Restrict the per-class rows to these class names")
    parser.add_argument("--ignore", dest="ignore_classes", type=int, nargs="*", help="Ignored class indices")
    parser.add_argument("--json", type=Path, help="Write the report as JSON")
    parser.add_argument("--csv", type=Path, help="Write the per-class table as CSV")
    parser.set_defaults(handler=run_eval)
