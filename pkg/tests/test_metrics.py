from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from peek.errors import EvaluationError
from peek.metrics import corpus, dtw_alignment, dtw_distance, endpoint_l2, evaluate_corpus, mask_iou
from peek.types import AnnotationBundle, NormPoint

coord = st.floats(0, 1, allow_nan=False)
paths = st.lists(st.tuples(coord, coord), min_size=1, max_size=8)


def test_dtw_hand_values():
    a = [(0, 0), (1, 0)]
    b = [(0, 0), (0, 0), (1, 0)]
    assert dtw_alignment(a, b) == (0.0, 3)
    cost, length = dtw_alignment([(0, 0)], [(0, 1), (0, 2)])
    assert (cost, length) == (3.0, 2)
    assert dtw_distance([(0, 0)], [(0, 1), (0, 2)]) == 1.5


@given(paths, paths)
def test_dtw_symmetric_and_nonnegative(a, b):
    assert dtw_distance(a, b) == pytest.approx(dtw_distance(b, a), abs=1e-12)
    assert dtw_distance(a, b) >= 0
    assert dtw_distance(a, a) == 0


@given(paths, paths)
def test_dtw_at_least_endpoint_average(a, b):
    # every alignment contains both endpoint pairs
    first, last = endpoint_l2(a, b)
    cost, length = dtw_alignment(a, b)
    assert cost >= max(first, last) - 1e-12
    assert max(len(a), len(b)) <= length <= len(a) + len(b) - 1


def test_dtw_rejects_empty():
    with pytest.raises(ValueError):
        dtw_distance([], [(0, 0)])


def test_mask_iou_union_of_squares():
    a = [(0.5, 0.5), (0.52, 0.5)]  # two overlapping squares count once
    assert mask_iou(a, a) == 1.0
    assert 0 < mask_iou(a, [(0.5, 0.5)]) < 1


def test_endpoint_l2():
    assert endpoint_l2([(0, 0), (1, 1)], [(0, 0.5), (1, 0)]) == (0.5, 1.0)


def _bundle(t, path, mask, variant=0):
    return AnnotationBundle(t, tuple(NormPoint(*p) for p in path), tuple(NormPoint(*p) for p in mask), "",
                            variant=variant)


def test_corpus_evaluation_and_unmatched():
    pred = corpus([("a", _bundle(0, [(0, 0), (1, 0)], [(0.5, 0.5)])),
                   ("a", _bundle(30, [(0, 0)], [(0.5, 0.5)])),
                   ("b", _bundle(0, [(0, 0)], [(0.5, 0.5)]))])
    gt = corpus([("a", _bundle(0, [(0, 0.1), (1, 0.1)], [(0.5, 0.5)])),
                 ("a", _bundle(30, [(0, 0)], [(0.1, 0.1)])),
                 ("c", _bundle(0, [(0, 0)], [(0.5, 0.5)]))])
    rep = evaluate_corpus(pred, gt)
    assert rep.n_samples == 2
    assert rep.dtw == pytest.approx(0.05)
    assert rep.iou == pytest.approx(0.5)
    assert rep.unmatched_pred == [("b", 0, 0)] and rep.unmatched_gt == [("c", 0, 0)]
    assert math.isclose(rep.to_json()["first_l2"], 0.05)


def test_corpus_rejects_duplicates_and_disjoint():
    b = _bundle(0, [(0, 0)], [(0, 0)])
    with pytest.raises(ValueError):
        corpus([("a", b), ("a", b)])
    with pytest.raises(EvaluationError):
        evaluate_corpus(corpus([("a", b)]), corpus([("z", b)]))
