"""File-level geometry operations driven by a JobConfig.

Shared by the CLI commands and the MCP tools: each one reads planar PNGs,
runs the projection, matching or stitching code and writes the results.
"""

import logging
from pathlib import Path
from typing import Any

from panosynth.config import JobConfig
from panosynth.geometry.cylproj import CylindricalCamera, measured_band, warp_to_cylinder
from panosynth.geometry.regmatch import adjacent_pairs, estimate_rig_distance, scan_match
from panosynth.geometry.stitcher import RigCalibration, save_panorama, stitch_panorama
from panosynth.imaging.io import load_image, load_labels, save_image, save_labels
from panosynth.imaging.models import ConfigError, Image, Palette

logger = logging.getLogger(__name__)


def camera_for(img: Image, job: JobConfig) -> CylindricalCamera:
    """Camera for an image's size with the job's focal length and radius."""
    return CylindricalCamera(f=job.f, width=img.width, height=img.height, r=job.radius)


def warp_file(src: Path, dst: Path, job: JobConfig, palette: Palette, labels: bool = False) -> dict[str, Any]:
    """Warp one image (or label map) file and report its valid band."""
    img = load_labels(src, palette) if labels else load_image(src)
    cam = camera_for(img, job)
    warped = warp_to_cylinder(img, cam)
    if labels:
        save_labels(dst, warped, palette, job.void_class)
    else:
        save_image(dst, warped)

    band = measured_band(warped)
    logger.info("Warped %s -> %s (band %s)", src, dst, band)
    return {
        "source": str(src),
        "output": str(dst),
        "f": cam.f,
        "r": cam.r,
        "valid_band": list(cam.valid_band()),
        "band_width": band[1] - band[0] + 1 if band else 0,
    }


def match_files(paths: list[Path], job: JobConfig, csv_path: Path | None = None) -> dict[str, Any]:
    """Warp the planar images and match them.

    Two images give one seam; four images are treated as a rig and matched
    around the whole ring, the median seam giving d.
    """
    if len(paths) not in (2, 4):
        raise ConfigError(f"match takes 2 images or a rig of 4, got {len(paths)}")
    images = [load_image(p) for p in paths]
    warped = [warp_to_cylinder(img, camera_for(img, job)) for img in images]
    cfg = job.match_config()

    if len(paths) == 2:
        curve = scan_match(warped[0], warped[1], cfg)
        if csv_path is not None:
            curve.to_csv(csv_path)
        logger.info("Matched %s/%s: d=%d", paths[0].name, paths[1].name, curve.d)
        return {"d": curve.d, "x_c1": curve.x_c1, "best_x_c2": curve.best_x_c2, "min_dv": curve.min_dv}

    estimate = estimate_rig_distance(adjacent_pairs(warped), cfg, job.spread_threshold)
    if csv_path is not None:
        for k, curve in enumerate(estimate.curves):
            curve.to_csv(csv_path.with_name(f"{csv_path.stem}_{k}{csv_path.suffix}"))
    return {
        "d": estimate.d,
        "seam_d": list(estimate.pair_d),
        "spread": estimate.spread,
        "calibration_warning": estimate.calibration_warning,
    }


def stitch_files(
    rgb_paths: list[Path],
    out_dir: Path,
    job: JobConfig,
    palette: Palette,
    label_paths: list[Path] | None = None,
    name: str = "pano",
    require_full: bool = False,
) -> dict[str, Any]:
    """Stitch four planar images (in ``job.order``) and write the result.

    With ``job.d`` unset, d is estimated from the frame itself.
    """
    if len(rgb_paths) != len(job.order):
        raise ConfigError(f"stitch needs {len(job.order)} RGB images, got {len(rgb_paths)}")
    if label_paths is not None and len(label_paths) != len(rgb_paths):
        raise ConfigError(f"stitch needs {len(rgb_paths)} label maps, got {len(label_paths)}")

    images = [load_image(p) for p in rgb_paths]
    labels = [load_labels(p, palette) for p in label_paths] if label_paths else None
    cam = camera_for(images[0], job)

    d = job.d
    if d is None:
        warped = [warp_to_cylinder(img, cam) for img in images]
        d = estimate_rig_distance(adjacent_pairs(warped), job.match_config(), job.spread_threshold).d

    calib = RigCalibration(d=d, cam=cam, order=tuple(job.order), fov_per_image=job.fov_per_image)
    pano = stitch_panorama(images, calib, labels, [p.stem for p in rgb_paths], require_full=require_full)
    paths = save_panorama(pano, out_dir, name, palette, job.void_class)
    sidecar = pano.sidecar().model_dump()
    sidecar["files"] = [str(p) for p in paths]
    return sidecar
