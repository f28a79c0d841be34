"""Input and output directory conventions of the dataset pipeline.

Input:  root/<seq>/<direction>/{rgb,labels}/<frame>.png
Output: out/<seq>/pano/{rgb,labels,meta}/<frame>.{png,json}
        out/<seq>/fov<N>/{rgb,labels}/<frame>_<k>.png
        out/<seq>/distort_f<F>/{rgb,labels}/<frame>_<direction>.png
        out/<seq>/views/{rgb,labels}/<frame>_<direction>.png
        out/manifest.json
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

from panosynth.geometry.stitcher import DIRECTIONS
from panosynth.imaging.models import SequenceLayoutError

logger = logging.getLogger(__name__)

KINDS = ("rgb", "labels")
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class SequenceSpec:
    name: str
    root: Path
    frame_ids: tuple[str, ...]

    def path(self, direction: str, kind: str, frame_id: str) -> Path:
        return self.root / direction / kind / f"{frame_id}.png"

    def rgb_path(self, direction: str, frame_id: str) -> Path:
        return self.path(direction, "rgb", frame_id)

    def label_path(self, direction: str, frame_id: str) -> Path:
        return self.path(direction, "labels", frame_id)

    def frame_files(self, frame_id: str) -> list[Path]:
        """The 8 files (4 RGB + 4 labels) of one frame."""
        return [self.path(d, k, frame_id) for d in DIRECTIONS for k in KINDS]


def discover_sequence(root: str | Path, name: str) -> SequenceSpec:
    """Collect the frames of ``root/<name>`` that have all 8 files.

    Frames missing any file are logged and left out.
    """
    seq_root = Path(root) / name
    missing_dirs = [seq_root / d / k for d in DIRECTIONS for k in KINDS if not (seq_root / d / k).is_dir()]
    if missing_dirs:
        raise SequenceLayoutError(
            f"sequence {name} lacks directories: {', '.join(str(p) for p in missing_dirs)}"
        )

    stems = [{p.stem for p in (seq_root / d / k).glob("*.png")} for d in DIRECTIONS for k in KINDS]
    every = set.union(*stems)
    complete = set.intersection(*stems)
    incomplete = sorted(every - complete)
    if incomplete:
        logger.warning("Sequence %s: %d incomplete frame(s) skipped: %s", name, len(incomplete), incomplete[:10])
    if not complete:
        raise SequenceLayoutError(f"sequence {name} has no complete frames")

    return SequenceSpec(name=name, root=seq_root, frame_ids=tuple(sorted(complete)))


def discover_sequences(root: str | Path, names: list[str] | None = None) -> list[SequenceSpec]:
    """All sequences under ``root`` (directories holding the four direction folders)."""
    root = Path(root)
    if not root.is_dir():
        raise SequenceLayoutError(f"dataset root {root} is not a directory")
    if names is None:
        names = sorted(
            p.name for p in root.iterdir() if p.is_dir() and all((p / d).is_dir() for d in DIRECTIONS)
        )
    if not names:
        raise SequenceLayoutError(f"no sequences found under {root}")
    return [discover_sequence(root, name) for name in names]


def format_focal(f: float) -> str:
    return f"{int(f)}" if float(f).is_integer() else f"{f:g}"


@dataclass(frozen=True)
class OutputLayout:
    out_root: Path
    sequence: str

    @property
    def base(self) -> Path:
        return self.out_root / self.sequence

    @property
    def pano_dir(self) -> Path:
        return self.base / "pano"

    def fov_path(self, fov: int, kind: str, frame_id: str, k: int) -> Path:
        return self.base / f"fov{fov}" / kind / f"{frame_id}_{k}.png"

    def distort_path(self, f: float, kind: str, frame_id: str, direction: str) -> Path:
        return self.base / f"distort_f{format_focal(f)}" / kind / f"{frame_id}_{direction}.png"

    def view_path(self, kind: str, frame_id: str, direction: str) -> Path:
        return self.base / "views" / kind / f"{frame_id}_{direction}.png"

    def relative(self, path: Path) -> str:
        return path.relative_to(self.out_root).as_posix()
