"""Keep only the tracks that move significantly over the trajectory."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyRelevanceError
from .types import NormPoint, TrackSet


@dataclass(frozen=True, eq=False)
class TaskPointSet:
    """Task-relevant tracks: ids into the source TrackSet and their (K, T, 2) positions."""

    kept_track_ids: tuple[int, ...]
    positions: np.ndarray

    def __post_init__(self) -> None:
        pos = np.array(self.positions, dtype=np.float64).reshape(len(self.kept_track_ids), -1, 2)
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def num_frames(self) -> int:
        return self.positions.shape[1]

    def at(self, t: int) -> list[NormPoint]:
        return [NormPoint(x, y) for x, y in self.positions[:, t, :]]

    @property
    def final_positions(self) -> list[NormPoint]:
        return self.at(self.num_frames - 1)


def max_displacement(tracks: np.ndarray, chunk: int = 64) -> np.ndarray:
    """Largest distance between any two positions of each track, for (N, T, 2) input."""
    tracks = np.asarray(tracks, dtype=np.float64)
    out = np.empty(tracks.shape[0])
    for s in range(0, tracks.shape[0], chunk):
        p = tracks[s:s + chunk]
        d = p[:, :, None, :] - p[:, None, :, :]
        out[s:s + chunk] = np.sqrt((d ** 2).sum(-1)).max(axis=(1, 2))
    return out


def moves_more_than(tracks: np.ndarray, threshold: float) -> np.ndarray:
    """Boolean per track: ``max_displacement > threshold``.

    The bounding box brackets the diameter (longest side <= diameter <=
    diagonal), so the quadratic scan only runs for tracks the box cannot decide.
    """
    tracks = np.asarray(tracks, dtype=np.float64)
    extent = tracks.max(axis=1) - tracks.min(axis=1)
    longest = extent.max(axis=1)
    diagonal = np.hypot(extent[:, 0], extent[:, 1])
    out = longest > threshold
    unsure = np.flatnonzero(~out & (diagonal > threshold))
    if unsure.size:
        out[unsure] = max_displacement(tracks[unsure]) > threshold
    return out


def filter_moving(tracks: TrackSet, threshold: float = 0.05) -> TaskPointSet:
    """Keep tracks whose maximum displacement exceeds ``threshold``.

    Raises EmptyRelevanceError when nothing moves.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    kept = np.flatnonzero(moves_more_than(tracks.positions, threshold))
    if kept.size == 0:
        raise EmptyRelevanceError(f"no track moves more than {threshold}")
    return TaskPointSet(tuple(int(i) for i in kept), tracks.positions[kept])
