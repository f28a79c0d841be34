"""Geometry tools: point projection, warping, region matching and stitching."""

import asyncio
import json
import logging
from pathlib import Path

from fastmcp import Context

from panosynth.geometry.cylproj import CylindricalCamera, ImagePoint, project_backward, project_forward
from panosynth.geometry.files import match_files, stitch_files, warp_file
from panosynth.imaging.models import PanoError
from panosynth.util.context import get_context, job_with

logger = logging.getLogger(__name__)


def _error(exc: Exception) -> str:
    return json.dumps({"error": f"{type(exc).__name__}: {exc}"}, indent=2)


def register_geometry_tools(mcp_server):
    """Register the projection, matching and stitching tools on the MCP server."""

    @mcp_server.tool()
    async def project_point(
        ctx: Context,
        x: float,
        y: float,
        f: float | None = None,
        r: float | None = None,
        width: int = 1280,
        height: int = 760,
        inverse: bool = False,
    ) -> str:
        """Map one point between the image plane and the cylinder.

        Coordinates are centre-origin pixels (x right, y down). With inverse
        set, (x, y) is a cylinder point and its planar preimage is returned.

        Returns a JSON object with the mapped point in centre-origin and
        storage (column, row) coordinates.
        """
        job = get_context(ctx).job
        if f is not None:
            radius = r if r is not None else f
        else:
            f, radius = job.f, r if r is not None else job.radius
        try:
            cam = CylindricalCamera(f=f, width=width, height=height, r=radius)
            point = ImagePoint(x, y)
            mapped = project_backward(point, cam) if inverse else project_forward(point, cam)
        except PanoError as exc:
            return _error(exc)
        column, row = cam.to_storage(mapped)
        return json.dumps({
            "x": mapped.x,
            "y": mapped.y,
            "column": column,
            "row": row,
            "f": cam.f,
            "r": cam.r,
        }, indent=2)

    @mcp_server.tool()
    async def warp_image(
        ctx: Context,
        path: str,
        output_path: str,
        labels: bool = False,
        f: float | None = None,
        r: float | None = None,
    ) -> str:
        """Warp a planar image (or label map with labels=true) onto the cylinder.

        Writes output_path and returns a JSON object with the camera
        parameters and the measured valid band width.
        """
        context = get_context(ctx)
        try:
            job = job_with(context.job, f=f, r=r)
            result = await asyncio.to_thread(
                warp_file, Path(path), Path(output_path), job, context.palette, labels
            )
        except (PanoError, OSError) as exc:
            return _error(exc)
        return json.dumps(result, indent=2)

    @mcp_server.tool()
    async def match_pair(
        ctx: Context,
        left_path: str,
        right_path: str,
        x_c1: int | None = None,
        region_width: int | None = None,
        csv_path: str | None = None,
    ) -> str:
        """Estimate the distance parameter d between two adjacent planar images.

        Both images are warped with the server's focal length, a reference
        region around column x_c1 of the left image is slid across the right
        image, and the minimum L1 discrepancy gives d = x_c1 - x_c2.

        Returns a JSON object with d, x_c1, best_x_c2 and min_dv.
        """
        context = get_context(ctx)
        try:
            job = job_with(context.job, x_c1=x_c1, region_width=region_width)
            result = await asyncio.to_thread(
                match_files, [Path(left_path), Path(right_path)], job, Path(csv_path) if csv_path else None
            )
        except (PanoError, OSError) as exc:
            return _error(exc)
        return json.dumps(result, indent=2)

    @mcp_server.tool()
    async def stitch_frame(
        ctx: Context,
        rgb_paths: list[str],
        output_dir: str,
        label_paths: list[str] | None = None,
        name: str = "pano",
        d: int | None = None,
    ) -> str:
        """Stitch four planar images (left, forward, right, back) into a panorama.

        Label maps, when given, are stitched with the same offsets. With no
        d the rig distance is estimated from the frame.

        Returns the panorama sidecar as JSON (d, width, height, seam offsets,
        invalid pixel count and the written files).
        """
        context = get_context(ctx)
        try:
            job = job_with(context.job, d=d)
            result = await asyncio.to_thread(
                stitch_files,
                [Path(p) for p in rgb_paths],
                Path(output_dir),
                job,
                context.palette,
                [Path(p) for p in label_paths] if label_paths else None,
                name,
            )
        except (PanoError, OSError) as exc:
            return _error(exc)
        return json.dumps(result, indent=2)
