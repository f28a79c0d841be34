"""Batch pipeline: four-direction sequences in, a panoramic dataset out.

Per kept frame the four RGB/label pairs are stitched, the panorama is
rotated to a seeded random direction, saved at native size, resized and
split by field of view. Optional distortion series and original-view
exports are written next to it, and everything lands in one manifest.
"""

from __future__ import annotations

import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, Field

from panosynth.config import JobConfig
from panosynth.dataset.layout import (
    MANIFEST_NAME,
    OutputLayout,
    SequenceSpec,
    discover_sequences,
)
from panosynth.geometry.cylproj import CylindricalCamera, warp_to_cylinder
from panosynth.geometry.regmatch import (
    RigEstimate,
    adjacent_pairs,
    discrepancy,
    estimate_rig_distance,
)
from panosynth.geometry.stitcher import (
    RigCalibration,
    resize_panorama,
    rotate_start,
    save_panorama,
    split_by_fov,
    stitch_panorama,
)
from panosynth.imaging.io import load_image, load_labels, save_image, save_labels
from panosynth.imaging.models import (
    ConfigError,
    DimensionError,
    ImageIOError,
    LabelMap,
    Palette,
    PanoError,
    Raster,
)
from panosynth.imaging.ops import resize

logger = logging.getLogger(__name__)

# Published full / kept-after-truncation frame counts of the SYNTHIA-PANO sequences.
SYNTHIA_PANO_SEQUENCES: dict[str, tuple[int, int]] = {
    "Seqs02-fall": (742, 461),
    "Seqs02-summer": (888, 556),
    "Seqs04-fall": (911, 738),
    "Seqs04-summer": (901, 694),
    "Seqs05-summer": (787, 787),
}

LabelledImage = tuple[Raster, LabelMap]


@dataclass(frozen=True)
class DistortionSpec:
    focal_lengths: tuple[float, ...] = (700.0, 600.0, 500.0, 400.0)

    def __post_init__(self) -> None:
        if any(not f > 0 for f in self.focal_lengths):
            raise ConfigError(f"focal lengths must be > 0, got {list(self.focal_lengths)}")


@dataclass(frozen=True)
class PipelineOptions:
    resize_to: tuple[int, int] = (3328, 768)
    splits: tuple[int, ...] = (90, 180, 360)
    distortion: DistortionSpec = field(default_factory=DistortionSpec)
    distort_directions: tuple[str, ...] = ("forward",)
    view_directions: tuple[str, ...] = ()
    view_size: tuple[int, int] = (1280, 768)
    dedup_threshold: float = 1.0
    seed: int = 0
    jobs: int = 1
    void_class: int = 15

    @classmethod
    def from_job(cls, job: JobConfig) -> PipelineOptions:
        return cls(
            resize_to=(job.resize_width, job.resize_height),
            splits=tuple(job.splits),
            distortion=DistortionSpec(tuple(job.distortion_focal_lengths)),
            distort_directions=tuple(job.distort_directions),
            view_directions=tuple(job.view_directions),
            view_size=(job.view_width, job.view_height),
            dedup_threshold=job.dedup_threshold,
            seed=job.seed,
            jobs=job.jobs,
            void_class=job.void_class,
        )


# ---------------------------------------------------------------------------
# Manifest
# ---------------------------------------------------------------------------


class FrameFailure(BaseModel):
    frame_id: str
    error: str


class CalibrationRecord(BaseModel):
    d: int
    f: float
    r: float
    order: list[str]
    fov_per_image: float
    estimated: bool = False
    seam_d: list[int] = Field(default_factory=list)
    calibration_warning: str | None = None
    frame_id: str | None = None


class PipelineParameters(BaseModel):
    resize: tuple[int, int]
    splits: list[int]
    distortion_focal_lengths: list[float]
    distort_directions: list[str]
    view_directions: list[str]
    dedup_threshold: float
    seed: int


class SequenceEntry(BaseModel):
    name: str
    full_count: int
    kept_count: int
    reference_counts: tuple[int, int] | None = None
    kept_frames: list[str]
    start_columns: dict[str, int] = Field(default_factory=dict)
    calibration: CalibrationRecord
    parameters: PipelineParameters
    outputs: list[str] = Field(default_factory=list)
    failures: list[FrameFailure] = Field(default_factory=list)


class SequenceFailure(BaseModel):
    name: str
    error: str


class DatasetManifest(BaseModel):
    sequences: list[SequenceEntry] = Field(default_factory=list)
    failed_sequences: list[SequenceFailure] = Field(default_factory=list)

    @property
    def output_count(self) -> int:
        return sum(len(s.outputs) for s in self.sequences)

    @property
    def has_failures(self) -> bool:
        return bool(self.failed_sequences) or any(s.failures for s in self.sequences)


class ManifestAudit(BaseModel):
    missing: list[str] = Field(default_factory=list)
    unlisted: list[str] = Field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not self.missing and not self.unlisted


def write_manifest(manifest: DatasetManifest, out_root: str | Path) -> Path:
    path = Path(out_root) / MANIFEST_NAME
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(manifest.model_dump_json(indent=2) + "\n")
    logger.info("Wrote manifest %s (%d outputs)", path, manifest.output_count)
    return path


def load_manifest(path: str | Path) -> DatasetManifest:
    try:
        return DatasetManifest.model_validate_json(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"Cannot read manifest {path}: {exc}") from exc


def audit_manifest(manifest: DatasetManifest, out_root: str | Path) -> ManifestAudit:
    """Compare the manifest with the files under ``out_root``.

    ``missing`` lists manifest outputs that do not exist; ``unlisted`` lists
    files inside a sequence's output directory that the manifest does not name.
    """
    out_root = Path(out_root)
    audit = ManifestAudit()
    for seq in manifest.sequences:
        listed = set(seq.outputs)
        audit.missing += [rel for rel in seq.outputs if not (out_root / rel).is_file()]
        seq_dir = out_root / seq.name
        on_disk = (p.relative_to(out_root).as_posix() for p in seq_dir.rglob("*") if p.is_file())
        audit.unlisted += sorted(rel for rel in on_disk if rel not in listed)

    if audit.missing:
        logger.warning("%d manifest output(s) missing on disk", len(audit.missing))
    if audit.unlisted:
        logger.warning("%d file(s) on disk not listed in the manifest", len(audit.unlisted))
    return audit


# ---------------------------------------------------------------------------
# Frame selection
# ---------------------------------------------------------------------------


def mean_discrepancy(a: Raster, b: Raster) -> float:
    """L1 discrepancy normalised by the number of pixel channels."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionError(f"cannot compare {a.width}x{a.height} with {b.width}x{b.height}")
    return discrepancy(a, b) / a.pixels.size


def dedup_frames(
    seq: SequenceSpec,
    threshold: float,
    direction: str = "forward",
    failures: dict[str, str] | None = None,
) -> list[str]:
    """Drop frames nearly identical to the last kept frame.

    A frame is dropped when the mean discrepancy of its ``direction`` RGB
    against the last kept frame is strictly below ``threshold``. The first
    readable frame is always kept.

    Unreadable frames raise, unless a ``failures`` dict is given: then they
    are recorded there (frame id to error) and skipped, and the last kept
    frame stays the reference.
    """
    if not seq.frame_ids:
        raise ConfigError(f"sequence {seq.name} has no frames")

    kept: list[str] = []
    last: Raster | None = None
    for frame_id in seq.frame_ids:
        try:
            current = load_image(seq.rgb_path(direction, frame_id))
        except ImageIOError as exc:
            if failures is None:
                raise
            logger.warning("Skipping unreadable frame %s/%s: %s", seq.name, frame_id, exc)
            failures[frame_id] = f"{type(exc).__name__}: {exc}"
            continue
        if last is not None:
            score = mean_discrepancy(last, current)
            if score < threshold:
                logger.debug("Dropping %s/%s (mean discrepancy %.3f)", seq.name, frame_id, score)
                continue
        kept.append(frame_id)
        last = current

    logger.info("Sequence %s: kept %d of %d frames", seq.name, len(kept), len(seq.frame_ids))
    return kept


# ---------------------------------------------------------------------------
# Derived image sets
# ---------------------------------------------------------------------------


def build_distortion_series(
    images: Sequence[LabelledImage],
    spec: DistortionSpec,
) -> dict[float, list[LabelledImage]]:
    """Warp each planar pair onto cylinders with r = f for every focal length.

    Shorter focal lengths bend the images more and narrow their valid band.
    """
    series: dict[float, list[LabelledImage]] = {}
    for f in spec.focal_lengths:
        group = []
        for rgb, labels in images:
            cam = CylindricalCamera(f=f, width=rgb.width, height=rgb.height, r=f)
            group.append((warp_to_cylinder(rgb, cam), warp_to_cylinder(labels, cam)))
        series[f] = group
        logger.debug("Distortion f=%g: %d image pair(s)", f, len(group))
    return series


def export_views(images: Sequence[LabelledImage], size: tuple[int, int]) -> list[LabelledImage]:
    """Resize unstitched direction images to the training size of the single-view baselines."""
    width, height = size
    return [(resize(rgb, width, height), resize(labels, width, height)) for rgb, labels in images]


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------


def load_frame(seq: SequenceSpec, frame_id: str, order: Sequence[str], palette: Palette) -> list[LabelledImage]:
    return [
        (load_image(seq.rgb_path(direction, frame_id)), load_labels(seq.label_path(direction, frame_id), palette))
        for direction in order
    ]


def estimate_sequence_distance(
    seq: SequenceSpec,
    cam: CylindricalCamera,
    job: JobConfig,
    frame_id: str | None = None,
) -> RigEstimate:
    """Region-match the four seams of one frame (the first by default)."""
    frame_id = frame_id or seq.frame_ids[0]
    warped = [warp_to_cylinder(load_image(seq.rgb_path(d, frame_id)), cam) for d in job.order]
    return estimate_rig_distance(adjacent_pairs(warped), job.match_config(), job.spread_threshold)


def calibrate(seq: SequenceSpec, job: JobConfig) -> tuple[RigCalibration, CalibrationRecord]:
    """Use ``job.d`` when given, otherwise estimate it from the sequence.

    The first frame whose images can be read sets the camera size and, without
    ``job.d``, is region-matched. Unreadable frames are skipped.
    """
    error: ImageIOError | None = None
    for frame_id in seq.frame_ids:
        try:
            first = load_image(seq.rgb_path(job.order[0], frame_id))
            cam = CylindricalCamera(f=job.f, width=first.width, height=first.height, r=job.radius)
            estimate = None if job.d is not None else estimate_sequence_distance(seq, cam, job, frame_id)
        except ImageIOError as exc:
            logger.warning("Calibration skips %s/%s: %s", seq.name, frame_id, exc)
            error = exc
            continue
        break
    else:
        raise error or ConfigError(f"sequence {seq.name} has no frames")

    d = job.d if estimate is None else estimate.d
    calib = RigCalibration(d=d, cam=cam, order=tuple(job.order), fov_per_image=job.fov_per_image)
    record = CalibrationRecord(
        d=d,
        f=cam.f,
        r=cam.r,
        order=list(job.order),
        fov_per_image=job.fov_per_image,
        estimated=estimate is not None,
        seam_d=list(estimate.pair_d) if estimate else [],
        calibration_warning=estimate.calibration_warning if estimate else None,
        frame_id=frame_id,
    )
    return calib, record


# ---------------------------------------------------------------------------
# Sequence build
# ---------------------------------------------------------------------------


@dataclass
class FrameResult:
    frame_id: str
    outputs: list[Path] = field(default_factory=list)
    start_column: int | None = None
    error: str | None = None


def frame_rng(seed: int, sequence: str, index: int) -> np.random.Generator:
    """Per-frame generator, independent of worker scheduling."""
    return np.random.default_rng([seed, zlib.crc32(sequence.encode()), index])


def discard_outputs(paths: Iterable[Path]) -> None:
    """Remove the files a failed frame already wrote."""
    for path in paths:
        path.unlink(missing_ok=True)
        logger.debug("Removed %s", path)


def _build_frame(
    seq: SequenceSpec,
    frame_id: str,
    index: int,
    calib: RigCalibration,
    layout: OutputLayout,
    options: PipelineOptions,
    palette: Palette,
) -> FrameResult:
    result = FrameResult(frame_id)
    void = options.void_class
    try:
        pairs = load_frame(seq, frame_id, calib.order, palette)
        by_direction = dict(zip(calib.order, pairs))
        pano = stitch_panorama(
            [rgb for rgb, _ in pairs],
            calib,
            [lab for _, lab in pairs],
            source_ids=[f"{direction}/{frame_id}" for direction in calib.order],
        )

        # start the panorama at a randomly chosen direction
        k = int(frame_rng(options.seed, seq.name, index).integers(len(calib.order)))
        pano = rotate_start(pano, calib.offsets[k])

        crops = {}
        if options.splits:
            resized = resize_panorama(pano, *options.resize_to)
            crops = {fov: split_by_fov(resized, fov) for fov in options.splits}
        series = build_distortion_series([by_direction[d] for d in options.distort_directions], options.distortion)
        views = export_views([by_direction[d] for d in options.view_directions], options.view_size)

        # nothing is written before every derived image exists
        result.outputs += save_panorama(pano, layout.pano_dir, frame_id, palette, void)
        for fov, frame_crops in crops.items():
            for n, (rgb, labels) in enumerate(frame_crops):
                result.outputs.append(save_image(layout.fov_path(fov, "rgb", frame_id, n), rgb))
                result.outputs.append(save_labels(layout.fov_path(fov, "labels", frame_id, n), labels, palette, void))
        for f, group in series.items():
            for direction, (rgb, labels) in zip(options.distort_directions, group):
                result.outputs.append(save_image(layout.distort_path(f, "rgb", frame_id, direction), rgb))
                result.outputs.append(
                    save_labels(layout.distort_path(f, "labels", frame_id, direction), labels, palette, void)
                )
        for direction, (rgb, labels) in zip(options.view_directions, views):
            result.outputs.append(save_image(layout.view_path("rgb", frame_id, direction), rgb))
            result.outputs.append(save_labels(layout.view_path("labels", frame_id, direction), labels, palette, void))
        result.start_column = pano.start_column
    except PanoError as exc:
        discard_outputs(result.outputs)
        result.outputs = []
        if isinstance(exc, ConfigError):
            raise
        logger.warning("Frame %s/%s failed: %s", seq.name, frame_id, exc)
        result.error = f"{type(exc).__name__}: {exc}"
    else:
        logger.info("Frame %s/%s: %d file(s)", seq.name, frame_id, len(result.outputs))
    return result


def build_sequence(
    seq: SequenceSpec,
    calib: RigCalibration,
    out_root: str | Path,
    options: PipelineOptions,
    palette: Palette,
    record: CalibrationRecord | None = None,
) -> SequenceEntry:
    """Dedup, stitch, rotate, resize, split and write one sequence.

    Frames are processed by ``options.jobs`` workers; output names depend only
    on frame ids, and results are collected in frame order. Per-frame
    failures (unreadable inputs included) are recorded and skipped, and a
    failed frame leaves no files behind; config errors abort.
    """
    layout = OutputLayout(Path(out_root), seq.name)
    unreadable: dict[str, str] = {}
    kept = dedup_frames(seq, options.dedup_threshold, failures=unreadable)

    def work(args: tuple[int, str]) -> FrameResult:
        index, frame_id = args
        return _build_frame(seq, frame_id, index, calib, layout, options, palette)

    with ThreadPoolExecutor(max_workers=options.jobs) as executor:
        results = list(executor.map(work, enumerate(kept)))

    if record is None:
        record = CalibrationRecord(
            d=calib.d,
            f=calib.cam.f,
            r=calib.cam.r,
            order=list(calib.order),
            fov_per_image=calib.fov_per_image,
        )

    errors = {**unreadable, **{r.frame_id: r.error for r in results if r.error}}
    entry = SequenceEntry(
        name=seq.name,
        full_count=len(seq.frame_ids),
        kept_count=len(kept),
        reference_counts=SYNTHIA_PANO_SEQUENCES.get(seq.name),
        kept_frames=kept,
        start_columns={r.frame_id: r.start_column for r in results if r.start_column is not None and r.error is None},
        calibration=record,
        parameters=PipelineParameters(
            resize=options.resize_to,
            splits=list(options.splits),
            distortion_focal_lengths=list(options.distortion.focal_lengths),
            distort_directions=list(options.distort_directions),
            view_directions=list(options.view_directions),
            dedup_threshold=options.dedup_threshold,
            seed=options.seed,
        ),
        outputs=[layout.relative(p) for r in results for p in r.outputs],
        failures=[FrameFailure(frame_id=i, error=errors[i]) for i in seq.frame_ids if i in errors],
    )
    if entry.failures:
        logger.warning("Sequence %s: %d frame(s) failed", seq.name, len(entry.failures))
    return entry


def build_dataset(
    root: str | Path,
    out_root: str | Path,
    job: JobConfig,
    palette: Palette,
    sequences: Iterable[str] | None = None,
) -> DatasetManifest:
    """Build every sequence under ``root`` and write ``out_root/manifest.json``.

    A sequence that cannot be calibrated is recorded in ``failed_sequences``
    and the remaining sequences are still built.
    """
    options = PipelineOptions.from_job(job)
    manifest = DatasetManifest()
    for seq in discover_sequences(root, list(sequences) if sequences is not None else None):
        try:
            calib, record = calibrate(seq, job)
        except ConfigError:
            raise
        except PanoError as exc:
            logger.error("Sequence %s: calibration failed: %s", seq.name, exc)
            manifest.failed_sequences.append(SequenceFailure(name=seq.name, error=f"{type(exc).__name__}: {exc}"))
            continue
        logger.info("Sequence %s: %d frame(s), d=%d", seq.name, len(seq.frame_ids), calib.d)
        manifest.sequences.append(build_sequence(seq, calib, out_root, options, palette, record))
    write_manifest(manifest, out_root)
    return manifest
