"""Split trajectories into subtrajectories at manipulation midpoints.

A frame is counted as "manipulation" when many task points hold still over
the next few frames. Stop counts are split into two groups with 1-D 2-means;
each maximal run of high-count frames becomes one manipulation section and its
middle frame becomes a subtrajectory boundary.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .relevance import TaskPointSet


@dataclass(frozen=True)
class StopSeries:
    """Stopped-point counts for frames ``0 .. len(counts) - 1``.

    ``counts[t]`` covers frames ``t .. t + window``; with a look-ahead window
    the series is ``window`` entries shorter than the trajectory. An empty
    series means the trajectory was too short to count anything.
    """

    counts: tuple[int, ...]
    window: int
    num_frames: int

    def __post_init__(self) -> None:
        if self.window < 0:
            raise ValueError(f"window must be >= 0, got {self.window}")
        if len(self.counts) > self.num_frames:
            raise ValueError("more counts than frames")


@dataclass(frozen=True)
class SubtrajectorySpan:
    """Frames ``start`` (inclusive) to ``end`` (exclusive).

    ``source_section`` is the manipulation section (first, last frame) whose
    midpoint produced ``start``; None for a trajectory start.
    """

    start: int
    end: int
    source_section: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        if self.end <= self.start or self.start < 0:
            raise ValueError(f"invalid span [{self.start}, {self.end})")

    def __len__(self) -> int:
        return self.end - self.start

    @property
    def last(self) -> int:
        return self.end - 1


def stop_counts(points: TaskPointSet, window: int = 5, still_eps: float = 0.01) -> StopSeries:
    """Count, per frame, the task points that stay within ``still_eps`` over the next ``window`` frames."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if still_eps <= 0:
        raise ValueError(f"still_eps must be > 0, got {still_eps}")
    pos = points.positions
    t_total = points.num_frames
    n_valid = t_total - window
    if n_valid <= 0:
        return StopSeries((), window, t_total)
    worst = np.zeros((pos.shape[0], n_valid))
    for a in range(window + 1):
        for b in range(a + 1, window + 1):
            d = pos[:, a:a + n_valid] - pos[:, b:b + n_valid]
            np.maximum(worst, np.hypot(d[..., 0], d[..., 1]), out=worst)
    counts = (worst < still_eps).sum(axis=0)
    return StopSeries(tuple(int(c) for c in counts), window, t_total)


def _sse_terms(values: Sequence[Fraction], weights: Sequence[int]) -> list[tuple[Fraction, int]]:
    """Exact within-cluster SSE for every threshold split of sorted distinct values.

    Entry ``k`` puts values[:k + 1] in the low cluster.
    """
    total_n = sum(weights)
    total_s = sum(v * w for v, w in zip(values, weights))
    total_q = sum(v * v * w for v, w in zip(values, weights))
    out = []
    n_lo, s_lo = 0, Fraction(0)
    for k in range(len(values) - 1):
        n_lo += weights[k]
        s_lo += values[k] * weights[k]
        n_hi, s_hi = total_n - n_lo, total_s - s_lo
        out.append((total_q - s_lo * s_lo / n_lo - s_hi * s_hi / n_hi, k))
    return out


def two_means(values: Sequence[float]) -> tuple[np.ndarray, float]:
    """Optimal 1-D 2-means clustering.

    Returns a boolean "high cluster" label per value and the within-cluster
    sum of squares. Optimal 1-D clusterings are contiguous in sorted order, so
    every threshold between distinct values is scored exactly (rational
    arithmetic) and the best one kept. Equal scores prefer the split that
    leaves more values in the low cluster. All-equal input puts everything in
    the low cluster.
    """
    arr = np.asarray(values)
    distinct, weights = np.unique(arr, return_counts=True)
    if len(distinct) < 2:
        return np.zeros(len(arr), dtype=bool), 0.0
    exact = [Fraction(v.item()) for v in distinct]
    terms = _sse_terms(exact, [int(w) for w in weights])
    best_sse = min(sse for sse, _ in terms)
    k = max(k for sse, k in terms if sse == best_sse)
    return arr > distinct[k], float(best_sse)


def manipulation_sections(series: StopSeries) -> list[tuple[int, int]]:
    """Manipulation sections as inclusive frame ranges.

    A high-count run over count indices ``i .. j`` certifies stillness over
    frames ``i .. j + window``, which is the section reported.
    """
    if not series.counts:
        return []
    high, _ = two_means(series.counts)
    sections = []
    i = None
    for t, h in enumerate(high.tolist() + [False]):
        if h and i is None:
            i = t
        elif not h and i is not None:
            sections.append((i, t - 1 + series.window))
            i = None
    return sections


def spans_from_splits(splits: Sequence[int], num_frames: int,
                      sections: Sequence[tuple[int, int] | None] | None = None) -> list[SubtrajectorySpan]:
    """Spans between consecutive split frames; spans shorter than 2 frames merge into the previous one."""
    if sections is None:
        sections = [None] * len(splits)
    bounds: list[tuple[int, tuple[int, int] | None]] = [(0, None)]
    for s, sec in sorted(zip(splits, sections), key=lambda p: p[0]):
        if 0 < s < num_frames and s != bounds[-1][0]:
            bounds.append((s, sec))
    raw = []
    for k, (start, sec) in enumerate(bounds):
        end = bounds[k + 1][0] if k + 1 < len(bounds) else num_frames
        raw.append((start, end, sec))
    merged: list[tuple[int, int, tuple[int, int] | None]] = []
    for start, end, sec in raw:
        if merged and end - start < 2:
            prev_start, _, prev_sec = merged[-1]
            merged[-1] = (prev_start, end, prev_sec)
        else:
            merged.append((start, end, sec))
    if len(merged) > 1 and merged[0][1] - merged[0][0] < 2:
        head = merged.pop(0)
        merged[0] = (head[0], merged[0][1], None)
    return [SubtrajectorySpan(*m) for m in merged]


def kmeans2_split(series: StopSeries) -> list[SubtrajectorySpan]:
    """Spans partitioning ``[0, num_frames)`` split at manipulation-section midpoints."""
    sections = manipulation_sections(series)
    splits = [(i + j) // 2 for i, j in sections]
    return spans_from_splits(splits, series.num_frames, sections)


def segment(points: TaskPointSet, window: int = 5, still_eps: float = 0.01) -> tuple[StopSeries, list[SubtrajectorySpan]]:
    series = stop_counts(points, window, still_eps)
    return series, kmeans2_split(series)
