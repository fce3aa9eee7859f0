from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from peek.errors import EmptyRelevanceError
from peek.oracle import margin_tracks
from peek.relevance import filter_moving, max_displacement, moves_more_than
from peek.types import TrackSet


def diameter(path) -> float:
    return max((math.dist(a, b) for a, b in itertools.combinations(path, 2)), default=0.0)


def test_max_displacement_is_pairwise_not_start_to_end():
    # out and back: start == end but the track clearly moved
    track = np.array([[[0.2, 0.2], [0.5, 0.6], [0.2, 0.2]]])
    assert max_displacement(track)[0] == pytest.approx(0.5)


@settings(max_examples=200, deadline=None)
@given(arrays(np.float64, (6, 7, 2), elements=st.floats(0, 1)), st.floats(0.01, 0.9))
def test_bbox_bracket_agrees_with_pairwise_scan(tracks, threshold):
    expected = np.array([diameter(t.tolist()) > threshold for t in tracks])
    assert np.array_equal(moves_more_than(tracks, threshold), expected)
    assert np.allclose(max_displacement(tracks), [diameter(t.tolist()) for t in tracks])


def test_filter_keeps_movers_only():
    pos = np.full((4, 10, 2), 0.5)
    pos[1, :, 0] = np.linspace(0.1, 0.9, 10)
    pos[3, :, 1] = np.linspace(0.5, 0.54, 10)  # 0.04, below threshold
    kept = filter_moving(TrackSet(pos), 0.05)
    assert kept.kept_track_ids == (1,)
    assert kept.positions.shape == (1, 10, 2)
    assert kept.final_positions[0].x == pytest.approx(0.9)


def test_threshold_is_strict():
    pos = np.full((1, 3, 2), 0.5)
    pos[0, 2, 0] = 0.75
    tracks = TrackSet(pos)
    assert filter_moving(tracks, 0.2).kept_track_ids == (0,)
    with pytest.raises(EmptyRelevanceError):
        filter_moving(tracks, 0.25)


def test_nothing_moves_raises():
    with pytest.raises(EmptyRelevanceError):
        filter_moving(TrackSet(np.full((4, 5, 2), 0.3)))


@pytest.mark.parametrize("seed", range(5))
def test_margin_scenes_straddle_threshold(seed):
    tracks, movers = margin_tracks(60, 40, seed=seed)
    d = max_displacement(tracks.positions)
    mover_mask = np.isin(np.arange(100), movers)
    assert d[mover_mask].min() >= 0.06 - 1e-9
    assert d[~mover_mask].max() <= 0.04 + 1e-9
