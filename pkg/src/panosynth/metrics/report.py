"""Evaluation reports over directories of label maps."""

from __future__ import annotations

import csv
import logging
import math
import re
from pathlib import Path
from typing import Iterable, Sequence

from pydantic import BaseModel, Field

from panosynth.imaging.io import load_labels
from panosynth.imaging.models import ConfigError, EmptyMatrixError, Palette
from panosynth.metrics.segmetrics import (
    ClassWeights,
    ConfusionMatrix,
    accumulate,
    class_weights,
    mean_class_accuracy,
    miou,
    per_class_accuracy,
    pixel_accuracy,
)

logger = logging.getLogger(__name__)

_SERIES_DIR = re.compile(r"^distort_f(?P<f>[0-9.]+)$")


class ClassResult(BaseModel):
    index: int
    name: str
    iou: float | None
    accuracy: float | None
    gt_pixels: int


class EvaluationReport(BaseModel):
    overall_accuracy: float
    mean_class_accuracy: float | None
    miou: float | None
    per_class: list[ClassResult]
    ignored_pixels: int
    images: int = 0
    missing_predictions: list[str] = Field(default_factory=list)


class WeightsReport(BaseModel):
    median: float
    weights: list[float]
    pixel_counts: list[int]
    zero_classes: list[int]
    names: list[str]


class SeriesPoint(BaseModel):
    f: float
    report: EvaluationReport


class SeriesReport(BaseModel):
    """Evaluation per focal length, longest first (the anti-distortion curve)."""

    points: list[SeriesPoint]


def _opt(value: float) -> float | None:
    return None if math.isnan(value) else float(value)


def build_report(
    cm: ConfusionMatrix,
    palette: Palette,
    classes: Sequence[str] | None = None,
    images: int = 0,
    missing: Iterable[str] = (),
) -> EvaluationReport:
    """Summarise a confusion matrix; ``classes`` restricts the per-class rows by name."""
    iou = miou(cm)
    acc = per_class_accuracy(cm)
    gt_pixels = cm.counts.sum(axis=1)

    wanted = range(len(palette.entries))
    if classes:
        try:
            wanted = [palette.index_of(name) for name in classes]
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc

    per_class = [
        ClassResult(
            index=c,
            name=palette.entries[c].name,
            iou=_opt(iou.per_class[c]),
            accuracy=_opt(acc[c]),
            gt_pixels=int(gt_pixels[c]),
        )
        for c in wanted
    ]
    return EvaluationReport(
        overall_accuracy=pixel_accuracy(cm),
        mean_class_accuracy=_opt(mean_class_accuracy(cm)),
        miou=_opt(iou.miou),
        per_class=per_class,
        ignored_pixels=cm.ignored,
        images=images,
        missing_predictions=sorted(missing),
    )


def build_weights_report(weights: ClassWeights, palette: Palette) -> WeightsReport:
    return WeightsReport(
        median=weights.median,
        weights=[float(w) for w in weights.weights],
        pixel_counts=[int(c) for c in weights.pixel_counts],
        zero_classes=list(weights.zero_classes),
        names=palette.names,
    )


def write_report_json(report: BaseModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n")
    return path


def write_report_csv(report: EvaluationReport, path: str | Path) -> Path:
    """One row per class: index, name, iou, accuracy, gt_pixels."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "name", "iou", "accuracy", "gt_pixels"])
        for row in report.per_class:
            writer.writerow([
                row.index,
                row.name,
                "" if row.iou is None else f"{row.iou:.6f}",
                "" if row.accuracy is None else f"{row.accuracy:.6f}",
                row.gt_pixels,
            ])
    return path


# ---------------------------------------------------------------------------
# Directory evaluation
# ---------------------------------------------------------------------------


def evaluate_directories(
    gt_dir: str | Path,
    pred_dir: str | Path,
    palette: Palette,
    ignore: Iterable[int],
    classes: Sequence[str] | None = None,
) -> tuple[ConfusionMatrix, EvaluationReport]:
    """Compare label PNGs of two directories, paired by file name.

    Ground-truth files without a prediction are reported, not fatal.
    """
    gt_dir, pred_dir = Path(gt_dir), Path(pred_dir)
    if not gt_dir.is_dir() or not pred_dir.is_dir():
        raise ConfigError(f"both {gt_dir} and {pred_dir} must be directories")

    cm = ConfusionMatrix.empty(ignore)
    images = 0
    missing: list[str] = []
    for gt_path in sorted(gt_dir.glob("*.png")):
        pred_path = pred_dir / gt_path.name
        if not pred_path.is_file():
            logger.warning("No prediction for %s", gt_path.name)
            missing.append(gt_path.name)
            continue
        cm = accumulate(cm, load_labels(gt_path, palette), load_labels(pred_path, palette))
        images += 1
        logger.info("Evaluated %s", gt_path.name)

    if images == 0:
        raise EmptyMatrixError(f"no label maps of {gt_dir} have a prediction in {pred_dir}")
    return cm, build_report(cm, palette, classes, images, missing)


def evaluate_series(
    gt_root: str | Path,
    pred_root: str | Path,
    palette: Palette,
    ignore: Iterable[int],
    classes: Sequence[str] | None = None,
) -> dict[float, EvaluationReport]:
    """Evaluate every ``distort_f<F>/labels`` group; keys are focal lengths, descending."""
    gt_root, pred_root = Path(gt_root), Path(pred_root)
    ignore = list(ignore)
    groups: dict[float, EvaluationReport] = {}
    for group in sorted(gt_root.iterdir() if gt_root.is_dir() else []):
        match = _SERIES_DIR.match(group.name)
        if not match or not group.is_dir():
            continue
        focal = float(match["f"])
        _, report = evaluate_directories(
            group / "labels", pred_root / group.name / "labels", palette, ignore, classes
        )
        groups[focal] = report
        logger.info("f=%g: mIoU=%s accuracy=%.4f", focal, report.miou, report.overall_accuracy)

    if not groups:
        raise ConfigError(f"no distort_f<F> groups under {gt_root}")
    return dict(sorted(groups.items(), reverse=True))


def series_report(reports: dict[float, EvaluationReport]) -> SeriesReport:
    return SeriesReport(points=[SeriesPoint(f=f, report=r) for f, r in reports.items()])


# ---------------------------------------------------------------------------
# Class weights
# ---------------------------------------------------------------------------


def label_files(directory: str | Path) -> list[Path]:
    files = sorted(Path(directory).rglob("*.png"))
    if not files:
        raise ConfigError(f"no label PNGs under {directory}")
    return files


def weights_for_directory(directory: str | Path, palette: Palette, ignore: Iterable[int]) -> WeightsReport:
    """Median-frequency weights over every label PNG under ``directory``."""
    files = label_files(directory)
    weights = class_weights((load_labels(p, palette) for p in files), ignore)
    logger.info("Class weights from %d label map(s), median count %g", len(files), weights.median)
    return build_weights_report(weights, palette)
