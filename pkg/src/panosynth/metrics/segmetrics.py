"""Confusion-matrix segmentation metrics and median-frequency class weights."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from panosynth.imaging.models import (
    NUM_CLASSES,
    RESERVED_CLASSES,
    DimensionError,
    EmptyMatrixError,
    LabelMap,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    """Pixel counts, rows = ground-truth class, columns = predicted class.

    ``ignore_classes`` are skipped when accumulating and excluded from the
    mean IoU and mean class accuracy.
    """

    counts: np.ndarray = field(default_factory=lambda: np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64))
    ignored: int = 0
    ignore_classes: frozenset[int] = frozenset(RESERVED_CLASSES)

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES):
            raise DimensionError(f"confusion matrix must be {NUM_CLASSES}x{NUM_CLASSES}, got {counts.shape}")
        if (counts < 0).any():
            raise ValueError("confusion matrix counts must be >= 0")
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "ignore_classes", frozenset(self.ignore_classes))

    @classmethod
    def empty(cls, ignore: Iterable[int] = RESERVED_CLASSES) -> ConfusionMatrix:
        return cls(ignore_classes=frozenset(ignore))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def merge(self, other: ConfusionMatrix) -> ConfusionMatrix:
        """Sum two matrices (shards accumulated independently)."""
        return ConfusionMatrix(
            self.counts + other.counts,
            self.ignored + other.ignored,
            self.ignore_classes | other.ignore_classes,
        )

    __add__ = merge


class IoUResult(NamedTuple):
    miou: float
    per_class: np.ndarray


@dataclass(frozen=True, eq=False)
class ClassWeights:
    weights: np.ndarray
    pixel_counts: np.ndarray
    zero_classes: tuple[int, ...]
    median: float


def accumulate(
    cm: ConfusionMatrix,
    gt: LabelMap,
    pred: LabelMap,
    ignore: Iterable[int] | None = None,
) -> ConfusionMatrix:
    """Tally one ground-truth/prediction pair into the matrix.

    Pixels whose ground truth is in ``ignore`` (default: the matrix's
    ignore set) or that are invalid in either map count as ignored.
    """
    if (gt.width, gt.height) != (pred.width, pred.height):
        raise DimensionError(
            f"ground truth {gt.width}x{gt.height} and prediction {pred.width}x{pred.height} differ"
        )
    ignore_set = cm.ignore_classes if ignore is None else frozenset(ignore)

    mask = gt.valid & pred.valid
    if ignore_set:
        mask &= ~np.isin(gt.classes, list(ignore_set))

    g = gt.classes[mask].astype(np.int64)
    p = pred.classes[mask].astype(np.int64)
    tally = np.bincount(g * NUM_CLASSES + p, minlength=NUM_CLASSES * NUM_CLASSES)
    counted = int(mask.sum())

    return ConfusionMatrix(
        cm.counts + tally.reshape(NUM_CLASSES, NUM_CLASSES),
        cm.ignored + gt.classes.size - counted,
        cm.ignore_classes | ignore_set,
    )


def _require_counts(cm: ConfusionMatrix) -> None:
    if cm.total == 0:
        raise EmptyMatrixError("confusion matrix has no counted pixels")


def _mean(values: Iterable[float]) -> float:
    values = [v for v in values if not math.isnan(v)]
    return math.fsum(values) / len(values) if values else math.nan


def pixel_accuracy(cm: ConfusionMatrix) -> float:
    """Correct pixels over counted pixels."""
    _require_counts(cm)
    return int(np.trace(cm.counts)) / cm.total


def per_class_accuracy(cm: ConfusionMatrix) -> np.ndarray:
    """Diagonal over row sums; NaN for classes without ground-truth pixels."""
    _require_counts(cm)
    rows = cm.counts.sum(axis=1)
    diag = np.diag(cm.counts)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(rows > 0, diag / np.maximum(rows, 1), np.nan)


def mean_class_accuracy(cm: ConfusionMatrix) -> float:
    acc = per_class_accuracy(cm)
    return _mean(float(acc[c]) for c in range(NUM_CLASSES) if c not in cm.ignore_classes)


def miou(cm: ConfusionMatrix) -> IoUResult:
    """Per-class IoU = TP / (TP + FP + FN) and their mean.

    Classes absent from both ground truth and prediction are NaN and left out
    of the mean; a class that is present but never predicted scores 0 and is
    included. Ignored classes never enter the mean.
    """
    _require_counts(cm)
    tp = np.diag(cm.counts)
    union = cm.counts.sum(axis=0) + cm.counts.sum(axis=1) - tp
    per_class = np.full(NUM_CLASSES, np.nan)
    for c in range(NUM_CLASSES):
        if union[c] > 0:
            per_class[c] = int(tp[c]) / int(union[c])

    mean = _mean(float(per_class[c]) for c in range(NUM_CLASSES) if c not in cm.ignore_classes)
    return IoUResult(mean, per_class)


def class_weights(label_maps: Iterable[LabelMap], ignore: Iterable[int] = ()) -> ClassWeights:
    """Median-frequency balancing: weight_c = median(nonzero counts) / count_c.

    Rare classes get larger weights. Classes without pixels (and ignored
    classes) get weight 0 and are listed in ``zero_classes``.
    """
    ignore_set = set(ignore)
    counts = np.zeros(NUM_CLASSES, dtype=np.int64)
    seen = 0
    for labels in label_maps:
        seen += 1
        counts += np.bincount(labels.classes[labels.valid].astype(np.int64), minlength=NUM_CLASSES)
    for c in ignore_set:
        counts[c] = 0

    nonzero = counts[counts > 0]
    if nonzero.size == 0:
        raise EmptyMatrixError(f"no labelled pixels in {seen} label map(s)")

    median = float(np.median(nonzero))
    weights = np.zeros(NUM_CLASSES, dtype=np.float64)
    present = counts > 0
    weights[present] = median / counts[present]
    zero = tuple(int(c) for c in np.flatnonzero(~present))
    if zero:
        logger.info("Classes without pixels get weight 0: %s", list(zero))
    return ClassWeights(weights, counts, zero, median)
