"""On-disk dataset layout.

::

    <root>/<traj_id>/frames/%06d.png      RGB frames
    <root>/<traj_id>/instruction.txt
    <root>/<traj_id>/tracks.jsonl         one line per frame: [[x, y], ...] for N points
    <root>/<traj_id>/gripper.jsonl        one line per frame: {present, x0, y0, x1, y1, conf}
    <root>/<traj_id>/annotations.jsonl    one line per bundle: {t, path, mask, ans, ...}
"""

from __future__ import annotations

import json
import os
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable

import numpy as np
from PIL import Image

from .errors import DatasetError
from .types import AnnotationBundle, Frame, GripperBox, NormPoint, Record, TrackSet, Trajectory

FRAMES_DIR = "frames"
INSTRUCTION_FILE = "instruction.txt"
TRACKS_FILE = "tracks.jsonl"
GRIPPER_FILE = "gripper.jsonl"
ANNOTATIONS_FILE = "annotations.jsonl"

_FRAME_RE = re.compile(r"^(\d{6})\.png$")


def frame_path(traj_dir: Path, index: int) -> Path:
    return traj_dir / FRAMES_DIR / f"{index:06d}.png"


def list_trajectory_dirs(root: str | Path) -> list[Path]:
    root = Path(root)
    if not root.is_dir():
        raise DatasetError("dataset root is not a directory", path=str(root))
    return sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith("."))


def _count_frames(traj_dir: Path) -> int:
    fdir = traj_dir / FRAMES_DIR
    if not fdir.is_dir():
        raise DatasetError("missing frames directory", traj_dir.name, str(fdir))
    indices = sorted(int(m.group(1)) for m in map(_FRAME_RE.match, os.listdir(fdir)) if m)
    for expected, got in enumerate(indices):
        if got != expected:
            raise DatasetError("missing frame", traj_dir.name, str(frame_path(traj_dir, expected)))
    return len(indices)


def read_frame(path: Path, index: int) -> Frame:
    with Image.open(path) as im:
        return Frame.from_array(index, np.asarray(im.convert("RGB")))


def write_frame(path: Path, frame: Frame) -> None:
    Image.fromarray(frame.array(), mode="RGB").save(path, format="PNG")


def _read_jsonl(path: Path, traj_id: str) -> list:
    if not path.is_file():
        raise DatasetError("missing file", traj_id, str(path))
    rows = []
    with open(path) as f:
        for lineno, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise DatasetError(f"malformed JSON on line {lineno}: {exc.msg}", traj_id, str(path)) from None
    return rows


def read_tracks(path: Path, traj_id: str, num_frames: int) -> TrackSet:
    rows = _read_jsonl(path, traj_id)
    if len(rows) != num_frames:
        raise DatasetError(
            f"length mismatch: {len(rows)} track rows for {num_frames} frames", traj_id, str(path))
    try:
        arr = np.array(rows, dtype=np.float64)
    except (TypeError, ValueError):
        raise DatasetError("malformed track file: rows are not uniform [x, y] lists", traj_id, str(path)) from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise DatasetError(f"malformed track file: expected T x N x 2, got shape {arr.shape}", traj_id, str(path))
    try:
        # grid initialized at the trajectory midpoint
        return TrackSet(np.transpose(arr, (1, 0, 2)), origin_frame=num_frames // 2)
    except ValueError as exc:
        raise DatasetError(f"malformed track file: {exc}", traj_id, str(path)) from None


def read_boxes(path: Path, traj_id: str, num_frames: int) -> list[GripperBox]:
    rows = _read_jsonl(path, traj_id)
    if len(rows) != num_frames:
        raise DatasetError(
            f"length mismatch: {len(rows)} gripper rows for {num_frames} frames", traj_id, str(path))
    boxes = []
    for t, row in enumerate(rows):
        try:
            if not row.get("present", False):
                boxes.append(GripperBox.absent(t))
                continue
            boxes.append(GripperBox(
                frame=t,
                lo=NormPoint(row["x0"], row["y0"]),
                hi=NormPoint(row["x1"], row["y1"]),
                confidence=float(row.get("conf", 1.0)),
                present=True,
            ))
        except (AttributeError, KeyError, TypeError, ValueError) as exc:
            raise DatasetError(f"malformed gripper row {t}: {exc}", traj_id, str(path)) from None
    return boxes


def load_trajectory(traj_dir: str | Path, load_frames: bool = True) -> Record:
    traj_dir = Path(traj_dir)
    traj_id = traj_dir.name
    length = _count_frames(traj_dir)
    if length < 2:
        raise DatasetError(f"trajectory has {length} frames, need at least 2", traj_id, str(traj_dir / FRAMES_DIR))
    instr_path = traj_dir / INSTRUCTION_FILE
    instruction = instr_path.read_text().strip() if instr_path.is_file() else ""
    tracks = read_tracks(traj_dir / TRACKS_FILE, traj_id, length)
    boxes = read_boxes(traj_dir / GRIPPER_FILE, traj_id, length)
    frames: tuple[Frame, ...] = ()
    if load_frames:
        frames = tuple(read_frame(frame_path(traj_dir, i), i) for i in range(length))
    return Record(Trajectory(traj_id, instruction, length, frames), tracks, tuple(boxes))


def load_dataset(root: str | Path, load_frames: bool = True, jobs: int = 1) -> list[Record]:
    """Load every trajectory under ``root``, sorted by trajectory id."""
    dirs = list_trajectory_dirs(root)
    if jobs > 1 and len(dirs) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(lambda d: load_trajectory(d, load_frames), dirs))
    return [load_trajectory(d, load_frames) for d in dirs]


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"))


def _write_text_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def tracks_lines(tracks: TrackSet) -> str:
    pos = tracks.positions
    return "".join(_dumps(pos[:, t, :].tolist()) + "\n" for t in range(tracks.num_frames))


def box_json(box: GripperBox) -> dict:
    if not box.present:
        return {"present": False}
    return {"present": True, "x0": box.lo.x, "y0": box.lo.y, "x1": box.hi.x, "y1": box.hi.y,
            "conf": box.confidence}


def save_record(root: str | Path, record: Record) -> Path:
    traj = record.trajectory
    traj_dir = Path(root) / traj.traj_id
    (traj_dir / FRAMES_DIR).mkdir(parents=True, exist_ok=True)
    for frame in traj.frames:
        write_frame(frame_path(traj_dir, frame.index), frame)
    _write_text_atomic(traj_dir / INSTRUCTION_FILE, traj.instruction + "\n")
    _write_text_atomic(traj_dir / TRACKS_FILE, tracks_lines(record.tracks))
    _write_text_atomic(traj_dir / GRIPPER_FILE, "".join(_dumps(box_json(b)) + "\n" for b in record.boxes))
    return traj_dir


def save_dataset(root: str | Path, records: Iterable[Record]) -> None:
    Path(root).mkdir(parents=True, exist_ok=True)
    for rec in records:
        save_record(root, rec)


def annotations_text(bundles: Iterable[AnnotationBundle]) -> str:
    return "".join(_dumps(b.to_json()) + "\n" for b in bundles)


def write_annotations(path: str | Path, bundles: Iterable[AnnotationBundle]) -> None:
    _write_text_atomic(Path(path), annotations_text(bundles))


def read_annotations(path: str | Path) -> list[AnnotationBundle]:
    path = Path(path)
    rows = _read_jsonl(path, path.parent.name)
    try:
        return [AnnotationBundle.from_json(r) for r in rows]
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"malformed annotation row: {exc}", path.parent.name, str(path)) from None
