from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peek.annotate import (augment_with_variants, build_annotation, finalize, query_frames, run_pipeline,
                           trajectory_seed)
from peek.config import PipelineConfig
from peek.errors import EmptyRelevanceError
from peek.relevance import TaskPointSet
from peek.segment import SubtrajectorySpan
from peek.text import parse, serialize
from peek.types import GripperPath, NormPoint, Record, TrackSet


def straight_grip(n):
    pos = np.stack([np.linspace(0.1, 0.9, n), np.full(n, 0.5)], axis=1)
    return GripperPath(pos, (False,) * n)


def test_build_annotation_hand_example():
    grip = straight_grip(10)
    task = TaskPointSet((0,), np.stack([np.linspace(0.2, 0.3, 10), np.full(10, 0.7)], axis=1)[None])
    raw = build_annotation(SubtrajectorySpan(2, 8), grip, task, 4)
    assert len(raw.path) == 4  # frames 4..7
    assert raw.path[0].x == pytest.approx(0.1 + 0.8 * 4 / 9)
    assert [tuple(p) for p in raw.mask] == [(0.24, 0.7), (0.28, 0.7)]  # x = 0.2 + 0.1 * t / 9 at t = 4 and 7
    with pytest.raises(ValueError):
        build_annotation(SubtrajectorySpan(2, 8), grip, task, 8)


def test_finalize_simplifies_and_serializes():
    grip = straight_grip(10)
    task = TaskPointSet((0,), np.full((1, 10, 2), 0.5))
    bundle = finalize(build_annotation(SubtrajectorySpan(0, 10), grip, task, 0), PipelineConfig(), variant=3)
    assert bundle.path == (NormPoint(0.1, 0.5), NormPoint(0.9, 0.5))
    assert bundle.mask == (NormPoint(0.5, 0.5),)
    assert bundle.ans == serialize(bundle.path, bundle.mask)
    assert parse(bundle.ans) == (list(bundle.path), list(bundle.mask))
    assert (bundle.span, bundle.variant) == ((0, 10), 3)


def test_query_frames_are_span_relative():
    assert list(query_frames(SubtrajectorySpan(7, 70), 30)) == [7, 37, 67]


@given(st.lists(st.integers(1, 99), max_size=4, unique=True), st.sampled_from([0.0, 0.2, 0.5]),
       st.integers(0, 4), st.integers(0, 1000))
def test_augmentation_stays_inside_trimmed_spans(cuts, trim, resamples, seed):
    bounds = [0] + sorted(cuts) + [100]
    spans = [SubtrajectorySpan(a, b) for a, b in zip(bounds, bounds[1:]) if b - a >= 2]
    out = augment_with_variants(spans, 100, trim, resamples, seed)
    originals = [s for v, s in out if v == 0]
    assert all(s.start >= int(trim * 100) and len(s) >= 2 for s in originals)
    assert {v for v, _ in out} <= set(range(resamples + 1))
    for v, s in out:
        assert len(s) >= 2
        assert any(o.start <= s.start and s.end <= o.end for o in originals)
    assert out == augment_with_variants(spans, 100, trim, resamples, seed)


def test_trajectory_seed_depends_on_id_not_order():
    assert trajectory_seed(0, "a") == trajectory_seed(0, "a")
    assert trajectory_seed(0, "a") != trajectory_seed(0, "b")
    assert trajectory_seed(1, "a") != trajectory_seed(0, "a")


def test_pipeline_output_is_sorted_and_quantized(one_grasp_scene):
    _, record, _ = one_grasp_scene
    bundles = run_pipeline(record).bundles
    keys = [(b.query_frame, b.variant, b.span) for b in bundles]
    assert keys == sorted(keys)
    for b in bundles:
        assert all(p == p.quantized() for p in b.path + b.mask)
        assert b.span[0] <= b.query_frame < b.span[1]


def test_static_scene_is_skipped():
    from peek.types import GripperBox, Trajectory
    T = 10
    record = Record(Trajectory("s", "", T), TrackSet(np.full((225, T, 2), 0.5)),
                    tuple(GripperBox(t, NormPoint(0.4, 0.4), NormPoint(0.6, 0.6)) for t in range(T)))
    with pytest.raises(EmptyRelevanceError):
        run_pipeline(record)
