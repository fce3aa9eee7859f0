"""Core domain types.

Coordinates are normalized image fractions in [0, 1]^2 with the origin at the
top-left corner: ``x`` is the column fraction and ``y`` the row fraction.
Conversion to pixels only happens in the renderer and in raster metrics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import AlignmentError

QUANT_DECIMALS = 2


def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, float(v)))


@dataclass(frozen=True, order=True)
class NormPoint:
    x: float
    y: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _clamp01(self.x))
        object.__setattr__(self, "y", _clamp01(self.y))

    def __iter__(self) -> Iterator[float]:
        yield self.x
        yield self.y

    def __getitem__(self, i: int) -> float:
        return (self.x, self.y)[i]

    def __len__(self) -> int:
        return 2

    def quantized(self) -> NormPoint:
        return NormPoint(quantize(self.x), quantize(self.y))


def quantize(v: float) -> float:
    """Round to the serialization grid (two decimals), matching ``format(v, '.2f')``."""
    return float(f"{v:.{QUANT_DECIMALS}f}")


def normalize(px: float, py: float, width: int, height: int) -> NormPoint:
    """Convert a pixel location to a clamped normalized point."""
    if width <= 0 or height <= 0:
        raise ValueError(f"image size must be positive, got {width}x{height}")
    return NormPoint(px / width, py / height)


def as_points(points: Iterable[Sequence[float]]) -> list[NormPoint]:
    return [p if isinstance(p, NormPoint) else NormPoint(p[0], p[1]) for p in points]


def points_array(points: Iterable[Sequence[float]]) -> np.ndarray:
    arr = np.array([(float(p[0]), float(p[1])) for p in points], dtype=np.float64)
    return arr.reshape(-1, 2)


def dedupe_quantized(points: Iterable[Sequence[float]]) -> list[NormPoint]:
    """Quantize points and drop duplicates, keeping first-seen order."""
    seen: set[NormPoint] = set()
    out = []
    for p in points:
        q = NormPoint(quantize(p[0]), quantize(p[1]))
        if q not in seen:
            seen.add(q)
            out.append(q)
    return out


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Frame:
    """One RGB observation stored as a row-major byte buffer."""

    index: int
    width: int
    height: int
    pixels: bytes

    def __post_init__(self) -> None:
        if self.index < 0:
            raise ValueError(f"frame index must be >= 0, got {self.index}")
        expected = self.width * self.height * 3
        if len(self.pixels) != expected:
            raise ValueError(
                f"frame {self.index}: pixel buffer has {len(self.pixels)} bytes, expected {expected}"
            )

    @classmethod
    def from_array(cls, index: int, arr: np.ndarray) -> Frame:
        arr = np.ascontiguousarray(arr, dtype=np.uint8)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected an HxWx3 array, got shape {arr.shape}")
        h, w, _ = arr.shape
        return cls(index=index, width=w, height=h, pixels=arr.tobytes())

    @classmethod
    def blank(cls, index: int, width: int, height: int, color=(0, 0, 0)) -> Frame:
        arr = np.empty((height, width, 3), dtype=np.uint8)
        arr[:] = color
        return cls.from_array(index, arr)

    def array(self) -> np.ndarray:
        """Read-only HxWx3 view of the pixels."""
        return np.frombuffer(self.pixels, dtype=np.uint8).reshape(self.height, self.width, 3)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return (self.index, self.width, self.height, self.pixels) == (
            other.index, other.width, other.height, other.pixels)

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A recorded episode.

    ``frames`` may be empty when a dataset is loaded without decoding images;
    ``length`` is always the true number of timesteps.
    """

    traj_id: str
    instruction: str
    length: int
    frames: tuple[Frame, ...] = ()

    def __post_init__(self) -> None:
        if self.length < 2:
            raise ValueError(f"trajectory {self.traj_id!r} needs at least 2 frames, got {self.length}")
        if self.frames:
            if len(self.frames) != self.length:
                raise AlignmentError(
                    f"trajectory {self.traj_id!r}: {len(self.frames)} frames for length {self.length}")
            for i, f in enumerate(self.frames):
                if f.index != i:
                    raise ValueError(f"trajectory {self.traj_id!r}: frame {i} has index {f.index}")


@dataclass(frozen=True, eq=False)
class TrackSet:
    """Point tracks for a g x g grid, as an (N, T, 2) array of normalized (x, y)."""

    positions: np.ndarray
    origin_frame: int = 0

    def __post_init__(self) -> None:
        pos = np.asarray(self.positions, dtype=np.float64)
        if pos.ndim != 3 or pos.shape[2] != 2:
            raise ValueError(f"track positions must have shape (N, T, 2), got {pos.shape}")
        n, t, _ = pos.shape
        side = math.isqrt(n)
        if side * side != n:
            raise ValueError(f"track count {n} is not a square grid")
        if not 0 <= self.origin_frame < max(t, 1):
            raise ValueError(f"origin frame {self.origin_frame} outside [0, {t})")
        object.__setattr__(self, "positions", _frozen(np.clip(pos, 0.0, 1.0)))

    @property
    def num_points(self) -> int:
        return self.positions.shape[0]

    @property
    def num_frames(self) -> int:
        return self.positions.shape[1]

    @property
    def grid_side(self) -> int:
        return math.isqrt(self.num_points)


@dataclass(frozen=True)
class GripperBox:
    frame: int
    lo: NormPoint
    hi: NormPoint
    confidence: float = 1.0
    present: bool = True

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0, 1], got {self.confidence}")
        if self.present and (self.lo.x > self.hi.x or self.lo.y > self.hi.y):
            raise ValueError(f"frame {self.frame}: box min corner exceeds max corner")

    @property
    def center(self) -> NormPoint:
        return NormPoint((self.lo.x + self.hi.x) / 2, (self.lo.y + self.hi.y) / 2)

    @classmethod
    def absent(cls, frame: int) -> GripperBox:
        return cls(frame, NormPoint(0, 0), NormPoint(0, 0), 0.0, False)


@dataclass(frozen=True, eq=False)
class GripperPath:
    """Per-frame end-effector positions, (T, 2), with gap-fill provenance."""

    positions: np.ndarray
    interpolated: tuple[bool, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "positions", _frozen(self.positions))
        if len(self.interpolated) != len(self.positions):
            raise ValueError("provenance flags must align with positions")

    def __len__(self) -> int:
        return len(self.positions)

    def points(self, start: int = 0, stop: int | None = None) -> list[NormPoint]:
        return [NormPoint(x, y) for x, y in self.positions[start:stop]]


@dataclass(frozen=True)
class AnnotationBundle:
    """A path/mask target anchored at a query frame.

    ``span`` and ``variant`` identify which (possibly resampled) subtrajectory
    produced the bundle; variant 0 is the unaugmented span.
    """

    query_frame: int
    path: tuple[NormPoint, ...]
    mask: tuple[NormPoint, ...]
    ans: str
    span: tuple[int, int] | None = None
    variant: int = 0

    def __post_init__(self) -> None:
        if not self.path:
            raise ValueError("annotation path needs at least one point")
        if not self.mask:
            raise ValueError("annotation mask needs at least one point")

    def to_json(self) -> dict:
        out = {
            "t": self.query_frame,
            "path": [[p.x, p.y] for p in self.path],
            "mask": [[p.x, p.y] for p in self.mask],
            "ans": self.ans,
            "variant": self.variant,
        }
        if self.span is not None:
            out["span"] = list(self.span)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> AnnotationBundle:
        span = obj.get("span")
        return cls(
            query_frame=int(obj["t"]),
            path=tuple(NormPoint(x, y) for x, y in obj["path"]),
            mask=tuple(NormPoint(x, y) for x, y in obj["mask"]),
            ans=obj.get("ans", ""),
            span=tuple(span) if span is not None else None,
            variant=int(obj.get("variant", 0)),
        )


@dataclass(frozen=True, eq=False)
class Record:
    """Everything the pipeline needs for one trajectory."""

    trajectory: Trajectory
    tracks: TrackSet
    boxes: tuple[GripperBox, ...] = field(default_factory=tuple)

    @property
    def traj_id(self) -> str:
        return self.trajectory.traj_id

    def __iter__(self):
        yield self.trajectory
        yield self.tracks
        yield list(self.boxes)
