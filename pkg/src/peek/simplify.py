"""Point-count reduction for paths (Ramer-Douglas-Peucker) and masks (greedy thinning)."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .types import NormPoint, as_points, dedupe_quantized


def point_segment_distance(p: Sequence[float], a: Sequence[float], b: Sequence[float]) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    denom = dx * dx + dy * dy
    if denom == 0.0:
        return math.hypot(px - ax, py - ay)
    t = min(1.0, max(0.0, ((px - ax) * dx + (py - ay) * dy) / denom))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _segment_distances(pts: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    denom = float(d @ d)
    rel = pts - a
    if denom == 0.0:
        return np.hypot(rel[:, 0], rel[:, 1])
    t = np.clip(rel @ d / denom, 0.0, 1.0)
    off = rel - t[:, None] * d
    return np.hypot(off[:, 0], off[:, 1])


def rdp_simplify(points: Sequence[Sequence[float]], eps: float) -> list[NormPoint]:
    """Ramer-Douglas-Peucker simplification of an ordered polyline.

    Distances are measured to the chord *segment* (not its infinite line), so
    every dropped point ends up within ``eps`` of the simplified polyline even
    when the path doubles back. A point is kept when its distance exceeds
    ``eps``. Endpoints are always kept; the result is a subsequence of the
    input.
    """
    pts = as_points(points)
    n = len(pts)
    if n <= 2:
        return pts
    arr = np.array([(p.x, p.y) for p in pts])
    keep = np.zeros(n, dtype=bool)
    keep[0] = keep[-1] = True
    stack = [(0, n - 1)]
    while stack:
        i, j = stack.pop()
        if j - i < 2:
            continue
        dist = _segment_distances(arr[i + 1:j], arr[i], arr[j])
        k = int(np.argmax(dist))
        if dist[k] > eps:
            k += i + 1
            keep[k] = True
            stack.append((i, k))
            stack.append((k, j))
    return [p for p, kept in zip(pts, keep) if kept]


def _hundredths(p: NormPoint) -> tuple[int, int]:
    return round(p.x * 100), round(p.y * 100)


def simplify_mask(mask: Sequence[Sequence[float]], eps: float) -> list[NormPoint]:
    """Greedy eps-packing of a point set.

    Points are quantized to two decimals, deduplicated and visited in (y, x)
    order; a point is dropped when it lies strictly closer than ``eps`` to a
    point already kept. Distances are compared exactly on the quantization
    grid, so kept points are pairwise at least ``eps`` apart and every dropped
    point is within ``eps`` of a kept one.
    """
    pts = sorted(dedupe_quantized(mask), key=lambda p: (p.y, p.x))
    if not pts:
        raise ValueError("cannot simplify an empty mask")
    limit = round(eps * 100, 6) ** 2
    kept: list[NormPoint] = []
    kept_grid: list[tuple[int, int]] = []
    for p in pts:
        gx, gy = _hundredths(p)
        if all((gx - kx) ** 2 + (gy - ky) ** 2 >= limit for kx, ky in kept_grid):
            kept.append(p)
            kept_grid.append((gx, gy))
    return kept
