"""Scripted synthetic scenes with exact ground truth.

A scene is a gray canvas with static distractor blocks, movable object blocks
and a square gripper. The gripper follows a piecewise-linear path through
waypoints. A grasp interval ``(start, end, obj)`` is a manipulation dwell:
the gripper holds still over ``start..end`` (inclusive) and the object is
attached to it from ``start`` until the next grasp interval begins, or until
the end of the trajectory. Attached objects translate rigidly with the
gripper; everything else stays put.

Tracks are a ``grid_side x grid_side`` grid initialized at the middle frame.
Each grid point sticks to whatever block covers it at that frame (gripper
first, then objects, then background). Gaussian noise, if any, is added to
tracks and to gripper boxes.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .annotate import annotate_spans, build_annotation, finalize, trajectory_seed
from .config import PipelineConfig
from .errors import ScriptError
from .relevance import TaskPointSet
from .segment import spans_from_splits
from .tracking import GridSpec, init_grid
from .types import AnnotationBundle, Frame, GripperBox, GripperPath, NormPoint, Record, TrackSet, Trajectory

BACKGROUND = (128, 128, 128)
GRIPPER_COLOR = (30, 30, 30)
OBJECT_COLORS = ((200, 40, 40), (40, 160, 60), (40, 80, 200), (220, 180, 30))
DISTRACTOR_COLOR = (150, 110, 70)
COLOR_NAMES = ("red", "green", "blue", "yellow")

XY = tuple[float, float]


@dataclass(frozen=True)
class SceneScript:
    num_frames: int
    waypoints: tuple[tuple[int, XY], ...]
    grasps: tuple[tuple[int, int, int], ...] = ()
    objects: tuple[XY, ...] = ()
    distractors: tuple[XY, ...] = ()
    noise: float = 0.0
    seed: int = 0
    name: str = "synth"
    width: int = 128
    height: int = 128
    grid_side: int = 20
    gripper_half: float = 0.1
    object_half: float = 0.05
    dropout: float = 0.0

    def __post_init__(self) -> None:
        T = self.num_frames
        if T < 2:
            raise ScriptError(f"num_frames must be >= 2, got {T}")
        if not self.waypoints:
            raise ScriptError("need at least one gripper waypoint")
        frames = [f for f, _ in self.waypoints]
        if any(b <= a for a, b in zip(frames, frames[1:])):
            raise ScriptError(f"waypoint frames must increase: {frames}")
        prev_end = -1
        for start, end, obj in sorted(self.grasps):
            if not 0 <= start <= end < T:
                raise ScriptError(f"grasp [{start}, {end}] outside [0, {T})")
            if start <= prev_end:
                raise ScriptError(f"grasp [{start}, {end}] overlaps the previous grasp")
            if not 0 <= obj < len(self.objects):
                raise ScriptError(f"grasp refers to unknown object {obj}")
            prev_end = end
        if self.noise < 0 or not 0 <= self.dropout < 1:
            raise ScriptError("noise must be >= 0 and dropout in [0, 1)")

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> SceneScript:
        obj = dict(obj)
        obj["waypoints"] = tuple((int(f), tuple(p)) for f, p in obj["waypoints"])
        obj["grasps"] = tuple(tuple(g) for g in obj.get("grasps", ()))
        obj["objects"] = tuple(tuple(p) for p in obj.get("objects", ()))
        obj["distractors"] = tuple(tuple(p) for p in obj.get("distractors", ()))
        return cls(**obj)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    mover_ids: tuple[int, ...]
    split_frames: tuple[int, ...]
    gripper: np.ndarray            # (T, 2) exact gripper centres
    objects: np.ndarray            # (K, T, 2) exact object centres
    tracks: np.ndarray             # (N, T, 2) noise-free tracks
    grasps: tuple[tuple[int, int, int], ...] = field(default_factory=tuple)

    def to_json(self, script: SceneScript) -> dict:
        return {
            "script": script.to_json(),
            "mover_ids": list(self.mover_ids),
            "split_frames": list(self.split_frames),
            "grasps": [list(g) for g in self.grasps],
            "gripper_path": self.gripper.tolist(),
            "object_targets": self.objects[:, -1, :].tolist(),
        }


def gripper_positions(script: SceneScript) -> np.ndarray:
    t = np.arange(script.num_frames)
    frames = np.array([f for f, _ in script.waypoints], dtype=float)
    pts = np.array([p for _, p in script.waypoints], dtype=float)
    return np.stack([np.interp(t, frames, pts[:, 0]), np.interp(t, frames, pts[:, 1])], axis=1)


def object_positions(script: SceneScript, grip: np.ndarray) -> np.ndarray:
    T = script.num_frames
    pos = np.repeat(np.array(script.objects, dtype=float).reshape(-1, 1, 2), T, axis=1)
    grasps = sorted(script.grasps)
    for k, (start, _, obj) in enumerate(grasps):
        release = grasps[k + 1][0] if k + 1 < len(grasps) else T
        offset = pos[obj, start] - grip[start]
        pos[obj, start:release] = grip[start:release] + offset
        pos[obj, release:] = pos[obj, release - 1]
    return pos


def split_frames(script: SceneScript) -> tuple[int, ...]:
    return tuple((s + e) // 2 for s, e, _ in sorted(script.grasps))


def _inside(p: Sequence[float], center: Sequence[float], half: float) -> bool:
    return center[0] - half <= p[0] < center[0] + half and center[1] - half <= p[1] < center[1] + half


def noise_free_tracks(script: SceneScript, grip: np.ndarray, objs: np.ndarray) -> tuple[np.ndarray, tuple[int, ...]]:
    """Grid tracks without noise, plus the ids of tracks attached to something that moves."""
    T = script.num_frames
    origin = T // 2
    grid = init_grid(GridSpec.centered(script.grid_side, T))
    tracks = np.empty((len(grid), T, 2))
    moving_objects = {k for k in range(len(script.objects)) if np.ptp(objs[k], axis=0).any()}
    movers = []
    for i, q in enumerate(grid):
        q = np.array([q.x, q.y])
        if _inside(q, grip[origin], script.gripper_half):
            tracks[i] = q + grip - grip[origin]
            movers.append(i)
            continue
        for k in range(len(script.objects)):
            if _inside(q, objs[k, origin], script.object_half):
                tracks[i] = q + objs[k] - objs[k, origin]
                if k in moving_objects:
                    movers.append(i)
                break
        else:
            tracks[i] = q
    return tracks, tuple(movers)


def _fill_square(img: np.ndarray, center: Sequence[float], half: float, color) -> None:
    h, w, _ = img.shape
    x0 = max(0, int(round((center[0] - half) * w)))
    x1 = min(w, int(round((center[0] + half) * w)))
    y0 = max(0, int(round((center[1] - half) * h)))
    y1 = min(h, int(round((center[1] + half) * h)))
    img[y0:y1, x0:x1] = color


def render_frames(script: SceneScript, grip: np.ndarray, objs: np.ndarray) -> tuple[Frame, ...]:
    frames = []
    for t in range(script.num_frames):
        img = np.empty((script.height, script.width, 3), dtype=np.uint8)
        img[:] = BACKGROUND
        for d in script.distractors:
            _fill_square(img, d, script.object_half, DISTRACTOR_COLOR)
        for k in range(len(script.objects)):
            _fill_square(img, objs[k, t], script.object_half, OBJECT_COLORS[k % len(OBJECT_COLORS)])
        _fill_square(img, grip[t], script.gripper_half, GRIPPER_COLOR)
        frames.append(Frame.from_array(t, img))
    return tuple(frames)


def instruction_for(script: SceneScript) -> str:
    if not script.grasps:
        return "move the gripper around"
    obj = sorted(script.grasps)[0][2]
    name = COLOR_NAMES[obj % len(COLOR_NAMES)]
    return f"pick up the {name} block" + (" and place it" if len(script.grasps) > 1 else "")


def ground_truth(script: SceneScript) -> GroundTruth:
    grip = gripper_positions(script)
    objs = object_positions(script, grip)
    tracks, movers = noise_free_tracks(script, grip, objs)
    return GroundTruth(movers, split_frames(script), grip, objs, tracks, tuple(sorted(script.grasps)))


def generate(script: SceneScript, render: bool = True) -> tuple[Trajectory, TrackSet, list[GripperBox], GroundTruth]:
    """Simulate the scene. Deterministic for a given script (including its seed)."""
    gt = ground_truth(script)
    T = script.num_frames
    rng = np.random.default_rng(script.seed)
    tracks = gt.tracks
    centers = gt.gripper
    if script.noise > 0:
        tracks = tracks + rng.normal(0.0, script.noise, tracks.shape)
        centers = centers + rng.normal(0.0, script.noise, centers.shape)
    drop = rng.random(T) < script.dropout if script.dropout > 0 else np.zeros(T, dtype=bool)
    if drop.all():
        drop[T // 2] = False
    h = script.gripper_half
    boxes = []
    for t in range(T):
        if drop[t]:
            boxes.append(GripperBox.absent(t))
        else:
            cx, cy = centers[t]
            boxes.append(GripperBox(t, NormPoint(cx - h, cy - h), NormPoint(cx + h, cy + h), 1.0, True))
    frames = render_frames(script, gt.gripper, gt.objects) if render else ()
    traj = Trajectory(script.name, instruction_for(script), T, frames)
    return traj, TrackSet(tracks, origin_frame=T // 2), boxes, gt


def generate_record(script: SceneScript, render: bool = True) -> tuple[Record, GroundTruth]:
    traj, tracks, boxes, gt = generate(script, render)
    return Record(traj, tracks, tuple(boxes)), gt


def _oracle_inputs(script: SceneScript) -> tuple[GroundTruth, GripperPath, TaskPointSet]:
    gt = ground_truth(script)
    grip = GripperPath(gt.gripper, (False,) * script.num_frames)
    task = TaskPointSet(gt.mover_ids, gt.tracks[list(gt.mover_ids)])
    return gt, grip, task


def oracle_annotations(script: SceneScript, config: PipelineConfig = PipelineConfig()) -> list[AnnotationBundle]:
    """Bundles built from the scripted truth: exact tracks, exact gripper path, true split frames."""
    gt, grip, task = _oracle_inputs(script)
    spans = spans_from_splits(gt.split_frames, script.num_frames)
    return annotate_spans(spans, grip, task, script.num_frames, config, trajectory_seed(config.seed, script.name))


def oracle_bundle_at(script: SceneScript, t: int, config: PipelineConfig = PipelineConfig()) -> AnnotationBundle:
    """Ground-truth bundle queried at frame ``t`` of the unaugmented spans."""
    gt, grip, task = _oracle_inputs(script)
    for span in spans_from_splits(gt.split_frames, script.num_frames):
        if span.start <= t < span.end:
            return finalize(build_annotation(span, grip, task, t), config)
    raise ValueError(f"frame {t} outside the trajectory")


# -- random scene factory ----------------------------------------------------

def _legs(rng: np.random.Generator, start: np.ndarray, end: np.ndarray, frames: int,
          lo: np.ndarray, hi: np.ndarray, min_speed: float) -> list[tuple[int, np.ndarray]]:
    """Waypoints (frame offset, point) from ``start`` to ``end`` over ``frames`` frames.

    Inserts random detours until every leg moves at least ``min_speed`` per frame.
    """
    for attempt in range(200):
        n_mid = attempt // 20 + max(0, frames // 15 - 1)
        mids = [rng.uniform(lo, hi) for _ in range(n_mid)]
        pts = [start, *mids, end]
        lengths = [float(np.linalg.norm(b - a)) for a, b in zip(pts, pts[1:])]
        if min(lengths) < 0.05:
            continue
        cum = np.cumsum([0.0, *lengths])
        offsets = np.round(cum / cum[-1] * frames).astype(int)
        if np.any(np.diff(offsets) < 1):
            continue
        speeds = np.array(lengths) / np.diff(offsets)
        if speeds.min() >= min_speed:
            return [(int(o), p) for o, p in zip(offsets[1:], pts[1:])]
    raise ScriptError("could not route gripper legs at the requested speed")


def random_script(seed: int, n_grasps: int = 1, *, noise: float = 0.0, name: str | None = None,
                  num_frames: int | None = None, n_distractors: int = 3, grid_side: int = 20,
                  min_speed: float = 0.012, width: int = 128, height: int = 128,
                  dropout: float = 0.0) -> SceneScript:
    """A pick (1 grasp) or pick-and-place (2 grasps) scene, or free motion (0 grasps).

    Gripper speed next to every dwell is at least ``min_speed`` per frame.
    """
    if n_grasps not in (0, 1, 2):
        raise ValueError("n_grasps must be 0, 1 or 2")
    rng = np.random.default_rng([seed, n_grasps, 7919])
    gh = 2.0 / grid_side
    oh = 1.0 / grid_side
    drop = np.array([0.0, gh + oh])  # object hangs just below the gripper
    lo = np.array([gh + 0.02, gh + 0.02])
    hi = np.array([1 - gh - 0.02, 1 - gh - oh * 2 - 0.04])
    T = int(num_frames or rng.integers(120, 181))

    def far_point(ref: np.ndarray) -> np.ndarray:
        for _ in range(1000):
            p = rng.uniform(lo, hi)
            if np.linalg.norm(p - ref) > 0.25:
                return p
        raise ScriptError("could not place a distant point")

    start = rng.uniform(lo, hi)
    grasp_pose = far_point(start)
    obj_rest = grasp_pose + drop
    waypoints: list[tuple[int, np.ndarray]] = [(0, start)]
    grasps: list[tuple[int, int, int]] = []

    def go(to: np.ndarray, until: int) -> None:
        f0, p0 = waypoints[-1]
        for off, p in _legs(rng, p0, to, until - f0, lo, hi, min_speed):
            waypoints.append((f0 + off, p))

    if n_grasps == 0:
        go(far_point(start), T - 1)
    elif n_grasps == 1:
        s = int(rng.integers(int(0.3 * T), int(0.5 * T)))
        e = s + int(rng.integers(10, 17))
        go(grasp_pose, s)
        waypoints.append((e, grasp_pose))
        go(far_point(grasp_pose), T - 1)
        grasps.append((s, e, 0))
    else:
        s1 = int(rng.integers(int(0.25 * T), int(0.33 * T)))
        e1 = s1 + int(rng.integers(10, 17))
        s2 = e1 + int(rng.integers(25, 41))
        e2 = s2 + int(rng.integers(10, 17))
        if e2 + 15 >= T:
            T = e2 + 25
        place_pose = far_point(grasp_pose)
        go(grasp_pose, s1)
        waypoints.append((e1, grasp_pose))
        go(place_pose, s2)
        waypoints.append((e2, place_pose))
        go(far_point(place_pose), T - 1)
        grasps += [(s1, e1, 0), (s2, e2, 0)]

    distractors = []
    for _ in range(n_distractors):
        for _ in range(1000):
            d = rng.uniform([0.08, 0.08], [0.92, 0.92])
            if np.abs(d - obj_rest).max() > 2 * oh + 0.02:
                distractors.append(tuple(float(v) for v in d))
                break
    return SceneScript(
        num_frames=T,
        waypoints=tuple((f, (float(p[0]), float(p[1]))) for f, p in waypoints),
        grasps=tuple(grasps),
        objects=(tuple(float(v) for v in obj_rest),),
        distractors=tuple(distractors),
        noise=noise,
        seed=seed,
        name=name or f"synth_{seed:05d}",
        width=width,
        height=height,
        grid_side=grid_side,
        gripper_half=gh,
        object_half=oh,
        dropout=dropout,
    )


# -- relevance margin scenes --------------------------------------------------

def _diameter(path: np.ndarray) -> float:
    # pairwise scan kept separate from the pipeline's vectorized version
    return max((math.dist(a, b) for a, b in itertools.combinations(path.tolist(), 2)), default=0.0)


def margin_tracks(n_static: int, n_movers: int, num_frames: int = 40, threshold: float = 0.05,
                  margin: float = 0.01, noise: float = 0.002, seed: int = 0) -> tuple[TrackSet, tuple[int, ...]]:
    """Tracks whose maximum displacement straddles ``threshold`` by ``margin``.

    Static tracks (noise included) stay below ``threshold - margin``; movers
    exceed ``threshold + margin``. Returns the tracks and the true mover ids.
    """
    n = n_static + n_movers
    if math.isqrt(n) ** 2 != n:
        raise ValueError(f"{n} tracks do not form a square grid")
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    movers = tuple(sorted(int(i) for i in order[:n_movers]))
    tracks = np.empty((n, num_frames, 2))
    for i in range(n):
        base = rng.uniform(0.3, 0.7, 2)
        if i in movers:
            direction = rng.normal(size=2)
            direction /= np.linalg.norm(direction)
            ramp = np.linspace(0.0, 1.0, num_frames)[:, None]
            path = base + ramp * direction * 0.2 + rng.normal(0.0, noise, (num_frames, 2))
            target = rng.uniform(threshold + margin, 0.3)
        else:
            path = base + np.cumsum(rng.normal(0.0, 0.004, (num_frames, 2)), axis=0)
            path += rng.normal(0.0, noise, (num_frames, 2))
            target = rng.uniform(0.0, threshold - margin)
        diam = _diameter(path)
        center = path.mean(axis=0)
        tracks[i] = center + (path - center) * (target / diam if diam > 0 else 0.0)
    return TrackSet(tracks, origin_frame=num_frames // 2), movers
