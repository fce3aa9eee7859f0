"""Point-grid and gripper-detection adapters.

The neural tracker and detector run elsewhere; this module turns their outputs
into pipeline inputs and prepares masked frames for the detector.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import AlignmentError, UnrecoverableTrajectoryError
from .render import square_raster
from .types import Frame, GripperBox, GripperPath, NormPoint, Trajectory

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSpec:
    side: int
    origin_frame: int = 0

    @classmethod
    def centered(cls, side: int, num_frames: int) -> GridSpec:
        """Grid initialized at the trajectory midpoint."""
        return cls(side, num_frames // 2)


def init_grid(spec: GridSpec) -> list[NormPoint]:
    """Cell-centre grid, row-major: point ``j * side + i`` is column i, row j."""
    s = spec.side
    if s < 1:
        raise ValueError(f"grid side must be >= 1, got {s}")
    return [NormPoint((i + 0.5) / s, (j + 0.5) / s) for j in range(s) for i in range(s)]


@dataclass(frozen=True)
class DetectorFrames:
    frames: list[Frame]
    blank: list[int]


def masked_frames_for_detector(trajectory: Trajectory, task_points: Sequence[Sequence[Sequence[float]]],
                               edge_frac: float = 0.08) -> DetectorFrames:
    """Black out everything except squares around each frame's task points.

    Frames with no task points come back fully black and are listed in
    ``blank``.
    """
    if len(task_points) != len(trajectory.frames):
        raise AlignmentError(
            f"{len(task_points)} task-point sets for {len(trajectory.frames)} frames")
    frames, blank = [], []
    for frame, pts in zip(trajectory.frames, task_points):
        keep = square_raster(pts, frame.width, frame.height, edge_frac)
        if not len(pts):
            blank.append(frame.index)
        out = np.where(keep[:, :, None], frame.array(), np.uint8(0))
        frames.append(Frame.from_array(frame.index, out))
    return DetectorFrames(frames, blank)


def gripper_path_from_boxes(boxes: Sequence[GripperBox], num_frames: int) -> GripperPath:
    """Box centres per frame, with gaps filled from neighbouring detections.

    A missing frame takes the midpoint of the nearest detections before and
    after it; gaps at either end copy the single nearest detection.
    """
    if len(boxes) != num_frames:
        raise AlignmentError(f"{len(boxes)} gripper boxes for {num_frames} frames")
    present = np.array([b.present for b in boxes], dtype=bool)
    if not present.any():
        raise UnrecoverableTrajectoryError("no gripper detected in any frame")
    centers = np.array([tuple(b.center) if b.present else (np.nan, np.nan) for b in boxes])
    idx = np.flatnonzero(present)
    t = np.arange(num_frames)
    # nearest present index at or before / at or after each frame
    before = idx[np.clip(np.searchsorted(idx, t, side="right") - 1, 0, len(idx) - 1)]
    after = idx[np.clip(np.searchsorted(idx, t, side="left"), 0, len(idx) - 1)]
    before = np.where(before > t, after, before)
    after = np.where(after < t, before, after)
    filled = (centers[before] + centers[after]) / 2
    out = np.where(present[:, None], centers, filled)
    n_filled = int((~present).sum())
    if n_filled:
        log.debug("filled %d of %d frames without gripper detections", n_filled, num_frames)
    return GripperPath(np.clip(out, 0.0, 1.0), tuple(bool(v) for v in ~present))
