"""Evaluation tools: segmentation metrics and class weights."""

import asyncio
import json
import logging
from pathlib import Path

from fastmcp import Context

from panosynth.imaging.models import PanoError
from panosynth.metrics.report import evaluate_directories, weights_for_directory
from panosynth.util.context import get_context, job_with

logger = logging.getLogger(__name__)


def register_evaluation_tools(mcp_server):
    """Register the metric tools on the MCP server."""

    @mcp_server.tool()
    async def evaluate_labels(
        ctx: Context,
        gt_dir: str,
        pred_dir: str,
        classes: list[str] | None = None,
    ) -> str:
        """Compare predicted label maps with ground truth, paired by file name.

        Reserved classes (14, 15) are ignored by default. Use classes to
        restrict the per-class rows to names such as "car" or "vegetation".

        Returns a JSON object with overall_accuracy, mean_class_accuracy,
        miou, per_class rows and the names of ground-truth files without a
        prediction.
        """
        context = get_context(ctx)
        try:
            _, report = await asyncio.to_thread(
                evaluate_directories,
                Path(gt_dir),
                Path(pred_dir),
                context.palette,
                context.job.ignore_classes,
                classes,
            )
        except (PanoError, OSError) as exc:
            logger.error("evaluate_labels failed: %s", exc)
            return json.dumps({"error": f"{type(exc).__name__}: {exc}"}, indent=2)
        return report.model_dump_json(indent=2)

    @mcp_server.tool()
    async def compute_class_weights(
        ctx: Context,
        labels_dir: str,
        ignore_classes: list[int] | None = None,
    ) -> str:
        """Median-frequency class weights over every label PNG under labels_dir.

        weight = median(nonzero class pixel counts) / class pixel count, so
        rare classes weigh more. Classes without pixels get 0.

        Returns a JSON object with weights, pixel_counts, zero_classes,
        median and the class names.
        """
        context = get_context(ctx)
        try:
            job = job_with(context.job, ignore_classes=ignore_classes)
            report = await asyncio.to_thread(
                weights_for_directory, Path(labels_dir), context.palette, job.ignore_classes
            )
        except (PanoError, OSError) as exc:
            logger.error("compute_class_weights failed: %s", exc)
            return json.dumps({"error": f"{type(exc).__name__}: {exc}"}, indent=2)
        return report.model_dump_json(indent=2)
