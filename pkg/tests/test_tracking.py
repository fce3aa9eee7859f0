from __future__ import annotations

import numpy as np
import pytest

from peek.errors import AlignmentError, UnrecoverableTrajectoryError
from peek.tracking import GridSpec, gripper_path_from_boxes, init_grid, masked_frames_for_detector
from peek.types import Frame, GripperBox, NormPoint, Trajectory


def box(t, cx, cy, half=0.05):
    return GripperBox(t, NormPoint(cx - half, cy - half), NormPoint(cx + half, cy + half), 0.9)


def test_grid_is_row_major_cell_centres():
    pts = init_grid(GridSpec(4))
    assert len(pts) == 16
    assert pts[0] == NormPoint(0.125, 0.125)
    assert pts[1] == NormPoint(0.375, 0.125)
    assert pts[4] == NormPoint(0.125, 0.375)
    assert GridSpec.centered(20, 51).origin_frame == 25
    with pytest.raises(ValueError):
        init_grid(GridSpec(0))


def test_gripper_path_fills_gaps():
    boxes = [GripperBox.absent(0), box(1, 0.2, 0.2), GripperBox.absent(2), GripperBox.absent(3),
             box(4, 0.6, 0.4), GripperBox.absent(5)]
    path = gripper_path_from_boxes(boxes, 6)
    expected = [(0.2, 0.2), (0.2, 0.2), (0.4, 0.3), (0.4, 0.3), (0.6, 0.4), (0.6, 0.4)]
    assert np.allclose(path.positions, expected)
    assert path.interpolated == (True, False, True, True, False, True)


def test_gripper_path_errors():
    with pytest.raises(UnrecoverableTrajectoryError):
        gripper_path_from_boxes([GripperBox.absent(i) for i in range(3)], 3)
    with pytest.raises(AlignmentError):
        gripper_path_from_boxes([box(0, 0.5, 0.5)], 2)


def test_detector_frames_black_out_all_but_task_points():
    frames = tuple(Frame.blank(i, 50, 50, (100, 100, 100)) for i in range(2))
    traj = Trajectory("t", "", 2, frames)
    out = masked_frames_for_detector(traj, [[(0.5, 0.5)], []], edge_frac=0.2)
    assert out.blank == [1]
    assert np.count_nonzero(out.frames[0].array().any(axis=2)) == 100
    assert not out.frames[1].array().any()
    with pytest.raises(AlignmentError):
        masked_frames_for_detector(traj, [[(0.5, 0.5)]])
