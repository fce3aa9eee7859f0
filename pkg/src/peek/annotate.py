"""Turn tracks and gripper detections into path/mask training targets."""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import PipelineConfig
from .errors import AlignmentError
from .relevance import TaskPointSet, filter_moving
from .segment import StopSeries, SubtrajectorySpan, segment
from .simplify import rdp_simplify, simplify_mask
from .text import serialize
from .tracking import gripper_path_from_boxes
from .types import AnnotationBundle, GripperPath, NormPoint, Record, dedupe_quantized

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawAnnotation:
    query_frame: int
    path: tuple[NormPoint, ...]
    mask: tuple[NormPoint, ...]
    span: SubtrajectorySpan


def build_annotation(span: SubtrajectorySpan, grip: GripperPath, task: TaskPointSet, t: int) -> RawAnnotation:
    """Path from ``t`` to the span's last frame; mask = task points at ``t`` and at that last frame."""
    if not span.start <= t < span.end:
        raise ValueError(f"query frame {t} outside span [{span.start}, {span.end})")
    if span.end > len(grip) or span.end > task.num_frames:
        raise AlignmentError(
            f"span ends at {span.end} but gripper path has {len(grip)} frames "
            f"and tracks have {task.num_frames}")
    path = tuple(grip.points(t, span.end))
    mask = tuple(dedupe_quantized(task.at(t) + task.at(span.last)))
    return RawAnnotation(t, path, mask, span)


def finalize(raw: RawAnnotation, config: PipelineConfig, variant: int = 0) -> AnnotationBundle:
    """Simplify, quantize and serialize a raw annotation."""
    path = tuple(p.quantized() for p in rdp_simplify(raw.path, config.rdp_eps_path))
    mask = tuple(simplify_mask(raw.mask, config.rdp_eps_mask))
    return AnnotationBundle(
        query_frame=raw.query_frame,
        path=path,
        mask=mask,
        ans=serialize(path, mask),
        span=(raw.span.start, raw.span.end),
        variant=variant,
    )


def augment_with_variants(spans: Sequence[SubtrajectorySpan], num_frames: int, trim_frac: float,
                          resample_count: int, seed) -> list[tuple[int, SubtrajectorySpan]]:
    """Trim the trajectory prefix, then add resampled copies of each span.

    Returns ``(variant, span)`` pairs: variant 0 are the trimmed originals,
    variants 1..resample_count the jittered copies.
    """
    cut = int(np.floor(trim_frac * num_frames))
    trimmed = []
    for s in spans:
        start = max(s.start, cut)
        if s.end - start >= 2:
            trimmed.append(SubtrajectorySpan(start, s.end, s.source_section))
    out = [(0, s) for s in trimmed]
    rng = np.random.default_rng(seed)
    for r in range(1, resample_count + 1):
        for s in trimmed:
            n = len(s)
            k = min(int(np.floor(trim_frac * n)), (n - 2) // 2)
            start = s.start + int(rng.integers(0, k + 1))
            end = s.end - int(rng.integers(0, k + 1))
            out.append((r, SubtrajectorySpan(start, end, s.source_section)))
    return out


def augment_spans(spans: Sequence[SubtrajectorySpan], num_frames: int, trim_frac: float = 0.2,
                  resample_count: int = 5, seed=0) -> list[SubtrajectorySpan]:
    return [s for _, s in augment_with_variants(spans, num_frames, trim_frac, resample_count, seed)]


def trajectory_seed(seed: int, traj_id: str) -> list[int]:
    """Per-trajectory RNG entropy; independent of processing order."""
    return [seed, zlib.crc32(traj_id.encode("utf-8"))]


def query_frames(span: SubtrajectorySpan, period: int) -> range:
    return range(span.start, span.end, period)


def annotate_spans(spans: Sequence[SubtrajectorySpan], grip: GripperPath, task: TaskPointSet,
                   num_frames: int, config: PipelineConfig, seed) -> list[AnnotationBundle]:
    bundles = []
    for variant, span in augment_with_variants(spans, num_frames, config.trim_frac, config.resample_count, seed):
        for t in query_frames(span, config.label_period):
            bundles.append(finalize(build_annotation(span, grip, task, t), config, variant))
    bundles.sort(key=lambda b: (b.query_frame, b.variant, b.span))
    return bundles


@dataclass(frozen=True, eq=False)
class PipelineResult:
    task: TaskPointSet
    grip: GripperPath
    series: StopSeries
    spans: list[SubtrajectorySpan]
    bundles: list[AnnotationBundle]


def run_pipeline(record: Record, config: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """Relevance filter, gripper path, segmentation and annotation for one trajectory."""
    T = record.trajectory.length
    if record.tracks.num_frames != T:
        raise AlignmentError(f"{record.tracks.num_frames} track frames for a {T}-frame trajectory")
    task = filter_moving(record.tracks, config.movement_threshold)
    grip = gripper_path_from_boxes(record.boxes, T)
    series, spans = segment(task, config.stop_window, config.still_eps)
    if not series.counts:
        log.info("%s: %d frames is not longer than the stop window; using one span", record.traj_id, T)
    bundles = annotate_spans(spans, grip, task, T, config, trajectory_seed(config.seed, record.traj_id))
    return PipelineResult(task, grip, series, spans, bundles)


def annotate_trajectory(record: Record, config: PipelineConfig = PipelineConfig()) -> list[AnnotationBundle]:
    return run_pipeline(record, config).bundles
