from __future__ import annotations

import json

import numpy as np
import pytest

from peek.errors import ScriptError
from peek.oracle import (SceneScript, generate, generate_record, ground_truth, object_positions,
                         gripper_positions, oracle_annotations, oracle_bundle_at, random_script)


def simple_script(**kw):
    base = dict(num_frames=40, waypoints=((0, (0.2, 0.2)), (20, (0.5, 0.5)), (39, (0.8, 0.2))),
                grasps=((18, 22, 0),), objects=((0.5, 0.6),))
    base.update(kw)
    return SceneScript(**base)


@pytest.mark.parametrize("kw", [
    dict(num_frames=1),
    dict(waypoints=()),
    dict(waypoints=((5, (0.1, 0.1)), (5, (0.2, 0.2)))),
    dict(grasps=((30, 45, 0),)),
    dict(grasps=((5, 10, 0), (10, 12, 0))),
    dict(grasps=((5, 10, 3),)),
    dict(noise=-1.0),
])
def test_invalid_scripts_raise(kw):
    with pytest.raises(ScriptError):
        simple_script(**kw)


def test_gripper_interpolates_waypoints():
    grip = gripper_positions(simple_script())
    assert np.allclose(grip[0], (0.2, 0.2))
    assert np.allclose(grip[10], (0.35, 0.35))
    assert np.allclose(grip[39], (0.8, 0.2))


def test_object_attaches_from_grasp_start():
    script = simple_script()
    grip = gripper_positions(script)
    objs = object_positions(script, grip)
    assert np.allclose(objs[0, :19], (0.5, 0.6))
    assert np.allclose(objs[0, 18:] - grip[18:], objs[0, 18] - grip[18])


def test_ground_truth_split_is_grasp_midpoint():
    assert ground_truth(simple_script()).split_frames == (20,)


def test_script_json_roundtrip():
    s = random_script(3, 2, noise=0.001)
    assert SceneScript.from_json(json.loads(json.dumps(s.to_json()))) == s


def test_generation_is_deterministic_and_noise_applies():
    s = random_script(5, 1, noise=0.003)
    (r1, _), (r2, _) = generate_record(s, render=False), generate_record(s, render=False)
    assert np.array_equal(r1.tracks.positions, r2.tracks.positions)
    clean = ground_truth(s).tracks
    assert not np.allclose(r1.tracks.positions, np.clip(clean, 0, 1))


def test_rendered_frames_show_gripper():
    s = random_script(2, 1, width=64, height=48)
    traj, _, boxes, gt = generate(s)
    assert len(traj.frames) == s.num_frames
    arr = traj.frames[0].array()
    assert arr.shape == (48, 64, 3)
    cx, cy = gt.gripper[0]
    assert tuple(arr[int(cy * 48), int(cx * 64)]) == (30, 30, 30)
    assert boxes[0].center.x == pytest.approx(cx)


def test_dropout_removes_some_boxes():
    _, _, boxes, _ = generate(random_script(4, 1, dropout=0.3), render=False)
    assert 0 < sum(not b.present for b in boxes) < len(boxes)


@pytest.mark.parametrize("n_grasps", [0, 1, 2])
def test_random_scripts_are_valid(n_grasps):
    for seed in range(10):
        s = random_script(seed, n_grasps)
        assert len(s.grasps) == n_grasps
        gt = ground_truth(s)
        assert len(gt.mover_ids) > 0


def test_oracle_bundle_matches_unaugmented_annotations():
    s = random_script(11, 2)
    bundles = [b for b in oracle_annotations(s) if b.variant == 0]
    for b in bundles:
        # same targets; the span field differs only where trimming shortened the first span
        got = oracle_bundle_at(s, b.query_frame)
        assert (got.path, got.mask, got.ans) == (b.path, b.mask, b.ans)
        assert got.span[1] == b.span[1]
    with pytest.raises(ValueError):
        oracle_bundle_at(s, s.num_frames)
