"""Path and mask metrics: DTW, endpoint L2 and raster IoU."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import EvaluationError
from .render import square_raster
from .types import AnnotationBundle

SampleKey = tuple[str, int, int]  # (trajectory id, query frame, variant)


def _cost_matrix(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> np.ndarray:
    pa = np.asarray([tuple(p) for p in a], dtype=np.float64).reshape(-1, 2)
    pb = np.asarray([tuple(p) for p in b], dtype=np.float64).reshape(-1, 2)
    d = pa[:, None, :] - pb[None, :, :]
    return np.hypot(d[..., 0], d[..., 1])


def dtw_alignment(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> tuple[float, int]:
    """Minimum total Euclidean cost over monotone alignments, and that alignment's length.

    Among equal-cost alignments the shortest one is used.
    """
    if not len(a) or not len(b):
        raise ValueError("DTW needs two non-empty paths")
    c = _cost_matrix(a, b).tolist()
    n, m = len(c), len(c[0])
    inf = (math.inf, 0)
    acc: list[list[tuple[float, int]]] = [[inf] * m for _ in range(n)]
    for i in range(n):
        for j in range(m):
            if i == 0 and j == 0:
                acc[0][0] = (c[0][0], 1)
                continue
            best = min(
                acc[i - 1][j - 1] if i and j else inf,
                acc[i - 1][j] if i else inf,
                acc[i][j - 1] if j else inf,
            )
            acc[i][j] = (best[0] + c[i][j], best[1] + 1)
    return acc[n - 1][m - 1]


def dtw_distance(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> float:
    """DTW cost normalized by the number of aligned pairs (per-step distance)."""
    cost, length = dtw_alignment(a, b)
    return cost / length


def endpoint_l2(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]]) -> tuple[float, float]:
    if not len(a) or not len(b):
        raise ValueError("endpoint distance needs two non-empty paths")
    first = math.hypot(a[0][0] - b[0][0], a[0][1] - b[0][1])
    last = math.hypot(a[-1][0] - b[-1][0], a[-1][1] - b[-1][1])
    return first, last


def mask_iou(a: Sequence[Sequence[float]], b: Sequence[Sequence[float]],
             edge_frac: float = 0.08, raster: int = 256) -> float:
    """IoU of the two masks rasterized with the renderer's square rule."""
    if not len(a) or not len(b):
        raise ValueError("IoU needs two non-empty masks")
    ra = square_raster(a, raster, raster, edge_frac)
    rb = square_raster(b, raster, raster, edge_frac)
    union = np.count_nonzero(ra | rb)
    return np.count_nonzero(ra & rb) / union


@dataclass(frozen=True)
class MetricsReport:
    dtw: float
    first_l2: float
    last_l2: float
    iou: float
    n_samples: int
    unmatched_pred: list[SampleKey] = field(default_factory=list)
    unmatched_gt: list[SampleKey] = field(default_factory=list)

    def to_json(self) -> dict:
        out = asdict(self)
        out["unmatched_pred"] = [list(k) for k in self.unmatched_pred]
        out["unmatched_gt"] = [list(k) for k in self.unmatched_gt]
        return out


def corpus(items: Iterable[tuple[str, AnnotationBundle]]) -> dict[SampleKey, AnnotationBundle]:
    """Index bundles by (trajectory id, query frame, variant); duplicate keys are an error."""
    out: dict[SampleKey, AnnotationBundle] = {}
    for traj_id, b in items:
        key = (traj_id, b.query_frame, b.variant)
        if key in out:
            raise ValueError(f"duplicate sample {key}")
        out[key] = b
    return out


def evaluate_corpus(pred: Mapping[SampleKey, AnnotationBundle], gt: Mapping[SampleKey, AnnotationBundle],
                    edge_frac: float = 0.08, raster: int = 256) -> MetricsReport:
    """Average per-sample metrics over samples present in both corpora.

    Samples present on only one side are listed in the report, not dropped.
    """
    matched = sorted(pred.keys() & gt.keys())
    if not matched:
        raise EvaluationError(f"no matching samples ({len(pred)} predicted, {len(gt)} ground truth)")
    dtws, firsts, lasts, ious = [], [], [], []
    for key in matched:
        p, g = pred[key], gt[key]
        dtws.append(dtw_distance(p.path, g.path))
        first, last = endpoint_l2(p.path, g.path)
        firsts.append(first)
        lasts.append(last)
        ious.append(mask_iou(p.mask, g.mask, edge_frac, raster))
    n = len(matched)
    return MetricsReport(
        dtw=math.fsum(dtws) / n,
        first_l2=math.fsum(firsts) / n,
        last_l2=math.fsum(lasts) / n,
        iou=math.fsum(ious) / n,
        n_samples=n,
        unmatched_pred=sorted(pred.keys() - gt.keys()),
        unmatched_gt=sorted(gt.keys() - pred.keys()),
    )
