"""Draw path and mask annotations onto frames.

Geometry is computed in pixel space after denormalizing with round-half-up.
Masks reveal axis-aligned squares of edge ``floor(edge_frac * min(w, h))``
centred on each point; everything else becomes black. Paths are drawn as
thick Bresenham lines whose colour steps from dark to light red, one constant
colour per segment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .types import AnnotationBundle, Frame, NormPoint

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class RenderSpec:
    color_start: RGB = (0x40, 0x00, 0x00)
    color_end: RGB = (0xFF, 0x00, 0x00)
    line_width: int = 3
    mask_edge_frac: float = 0.08

    def __post_init__(self) -> None:
        if self.line_width < 1:
            raise ValueError(f"line_width must be >= 1, got {self.line_width}")
        if not 0.0 < self.mask_edge_frac < 1.0:
            raise ValueError(f"mask_edge_frac must be in (0, 1), got {self.mask_edge_frac}")


def round_half_up(v: float) -> int:
    return math.floor(v + 0.5)


def to_pixel(p: Sequence[float], width: int, height: int) -> tuple[int, int]:
    return round_half_up(p[0] * width), round_half_up(p[1] * height)


def square_edge(width: int, height: int, edge_frac: float) -> int:
    # the epsilon keeps products like 0.29 * 100 from flooring to 28
    return max(1, math.floor(edge_frac * min(width, height) + 1e-9))


def square_bounds(p: Sequence[float], width: int, height: int, edge: int) -> tuple[int, int, int, int]:
    """Pixel bounds ``(x0, x1, y0, y1)`` (half-open, clipped) of the square around ``p``."""
    cx, cy = to_pixel(p, width, height)
    x0 = cx - edge // 2
    y0 = cy - edge // 2
    return max(0, x0), min(width, x0 + edge), max(0, y0), min(height, y0 + edge)


def square_raster(points: Sequence[Sequence[float]], width: int, height: int, edge_frac: float) -> np.ndarray:
    """Boolean (height, width) raster of the union of mask squares."""
    out = np.zeros((height, width), dtype=bool)
    edge = square_edge(width, height, edge_frac)
    for p in points:
        x0, x1, y0, y1 = square_bounds(p, width, height, edge)
        if x0 < x1 and y0 < y1:
            out[y0:y1, x0:x1] = True
    return out


def segment_color(k: int, num_segments: int, spec: RenderSpec) -> RGB:
    """Colour of segment ``k``: linear in RGB from start (first) to end (last)."""
    t = 0.0 if num_segments <= 1 else k / (num_segments - 1)
    return tuple(
        round_half_up(a + (b - a) * t) for a, b in zip(spec.color_start, spec.color_end)
    )  # type: ignore[return-value]


def bresenham(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    out = []
    while True:
        out.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return out
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _stamp_square(labels: np.ndarray, x: int, y: int, w: int, value: int) -> None:
    h, wd = labels.shape
    lo = -((w - 1) // 2)
    x0, x1 = max(0, x + lo), min(wd, x + lo + w)
    y0, y1 = max(0, y + lo), min(h, y + lo + w)
    if x0 < x1 and y0 < y1:
        labels[y0:y1, x0:x1] = value


def _stamp_disc(labels: np.ndarray, x: int, y: int, r: int, value: int) -> None:
    h, wd = labels.shape
    x0, x1 = max(0, x - r), min(wd, x + r + 1)
    y0, y1 = max(0, y - r), min(h, y + r + 1)
    if x0 >= x1 or y0 >= y1:
        return
    ys, xs = np.mgrid[y0:y1, x0:x1]
    window = labels[y0:y1, x0:x1]
    window[(xs - x) ** 2 + (ys - y) ** 2 <= r * r] = value


def rasterize_path(path: Sequence[Sequence[float]], width: int, height: int,
                   spec: RenderSpec) -> tuple[np.ndarray, list[RGB]]:
    """Label each pixel with the index of the colour that covers it (-1 = none).

    Later segments overwrite earlier ones where they overlap, so joints take
    the lighter colour.
    """
    labels = np.full((height, width), -1, dtype=np.int32)
    if not path:
        return labels, []
    pix = [to_pixel(p, width, height) for p in path]
    if len(pix) == 1:
        _stamp_disc(labels, *pix[0], spec.line_width, 0)
        return labels, [spec.color_end]
    n = len(pix) - 1
    colors = [segment_color(k, n, spec) for k in range(n)]
    for k in range(n):
        (xa, ya), (xb, yb) = pix[k], pix[k + 1]
        if (xa, ya) == (xb, yb):
            _stamp_disc(labels, xa, ya, spec.line_width, k)
            continue
        for x, y in bresenham(xa, ya, xb, yb):
            _stamp_square(labels, x, y, spec.line_width, k)
    return labels, colors


def draw_path(frame: Frame, path: Sequence[Sequence[float]], spec: RenderSpec = RenderSpec()) -> Frame:
    labels, colors = rasterize_path(path, frame.width, frame.height, spec)
    out = frame.array().copy()
    for k, color in enumerate(colors):
        out[labels == k] = color
    return Frame.from_array(frame.index, out)


def apply_mask(frame: Frame, mask: Sequence[Sequence[float]], spec: RenderSpec = RenderSpec()) -> Frame:
    keep = square_raster(mask, frame.width, frame.height, spec.mask_edge_frac)
    out = np.where(keep[:, :, None], frame.array(), np.uint8(0))
    return Frame.from_array(frame.index, out)


def compose_parts(frame: Frame, path: Sequence[NormPoint], mask: Sequence[NormPoint],
                  spec: RenderSpec = RenderSpec()) -> Frame:
    """Mask first, then draw the path so it stays visible over blacked-out areas."""
    out = apply_mask(frame, mask, spec) if mask else frame
    return draw_path(out, path, spec) if path else out


def compose(frame: Frame, bundle: AnnotationBundle, spec: RenderSpec = RenderSpec()) -> Frame:
    return compose_parts(frame, bundle.path, bundle.mask, spec)
