from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peek.render import (RenderSpec, bresenham, compose_parts, rasterize_path, round_half_up, segment_color,
                         square_bounds, square_edge, square_raster, to_pixel)
from peek.types import Frame, NormPoint


def test_round_half_up_and_pixels():
    assert [round_half_up(v) for v in (0.5, 1.5, 2.5, -0.5)] == [1, 2, 3, 0]
    assert to_pixel((0.5, 0.25), 256, 128) == (128, 32)


def test_square_edge_and_bounds():
    assert square_edge(256, 256, 0.08) == 20
    assert square_edge(320, 240, 0.08) == 19  # shorter side
    assert square_edge(100, 100, 0.29) == 29
    assert square_bounds((0.5, 0.5), 256, 256, 20) == (118, 138, 118, 138)
    assert square_bounds((0.0, 1.0), 256, 256, 20) == (0, 10, 246, 256)  # clipped


def test_mask_square_pixel_count_at_corner():
    assert square_raster([(0.0, 0.0)], 256, 256, 0.08).sum() == 100


def test_segment_colors_interpolate_end_to_end():
    spec = RenderSpec()
    assert [segment_color(k, 4, spec)[0] for k in range(4)] == [0x40, 0x80, 0xBF, 0xFF]
    assert segment_color(0, 1, spec) == spec.color_start  # lone segment: interpolation parameter 0


@given(st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20), st.integers(-20, 20))
def test_bresenham_is_connected_and_hits_endpoints(x0, y0, x1, y1):
    pts = bresenham(x0, y0, x1, y1)
    assert pts[0] == (x0, y0) and pts[-1] == (x1, y1)
    assert len(pts) == max(abs(x1 - x0), abs(y1 - y0)) + 1
    assert all(max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1 for a, b in zip(pts, pts[1:]))


def test_single_point_path_is_disc():
    labels, colors = rasterize_path([(0.5, 0.5)], 64, 64, RenderSpec(line_width=2))
    assert colors == [RenderSpec().color_end]
    assert (labels == 0).sum() == 13  # lattice points with x^2 + y^2 <= 4


def test_horizontal_line_width():
    labels, _ = rasterize_path([(0.25, 0.5), (0.75, 0.5)], 64, 64, RenderSpec(line_width=3))
    rows = np.flatnonzero((labels >= 0).any(axis=1))
    assert rows.tolist() == [31, 32, 33]
    assert (labels >= 0).sum() == 3 * (48 - 16 + 3)


def test_compose_masks_then_draws():
    frame = Frame.blank(3, 64, 64, (10, 20, 30))
    out = compose_parts(frame, [NormPoint(0.1, 0.9), NormPoint(0.9, 0.9)], [NormPoint(0.5, 0.5)])
    arr = out.array()
    assert out.index == 3
    assert tuple(arr[32, 32]) == (10, 20, 30)  # inside mask
    assert tuple(arr[5, 5]) == (0, 0, 0)  # blacked out
    assert arr[58, 32, 0] > 0 and arr[58, 32, 1] == 0  # path drawn over the blacked-out region


def test_compose_does_not_mutate_input():
    frame = Frame.blank(0, 16, 16, (200, 200, 200))
    before = frame.pixels
    compose_parts(frame, [NormPoint(0, 0), NormPoint(1, 1)], [NormPoint(0.5, 0.5)])
    assert frame.pixels == before


def test_render_spec_validation():
    with pytest.raises(ValueError):
        RenderSpec(line_width=0)
