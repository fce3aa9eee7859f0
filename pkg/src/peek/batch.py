"""Per-trajectory batch execution with a deterministic run manifest."""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .annotate import run_pipeline
from .config import PipelineConfig
from .dataset import ANNOTATIONS_FILE, list_trajectory_dirs, load_trajectory, write_annotations
from .errors import PeekError, TrajectorySkipped

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrajectoryStatus:
    traj_id: str
    status: str  # "ok", "skipped" or "failed"
    reason: str = ""
    outputs: int = 0

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    trajectories: list[TrajectoryStatus] = field(default_factory=list)
    started_at: str = ""
    wall_time_s: float = 0.0

    @property
    def ok(self) -> bool:
        return all(t.ok for t in self.trajectories)

    def to_json(self) -> dict:
        return {
            "tool": "peek",
            "version": __version__,
            "subcommand": self.subcommand,
            "config": self.config,
            "trajectories": [
                {"id": t.traj_id, "status": t.status, "reason": t.reason, "outputs": t.outputs}
                for t in self.trajectories
            ],
            # everything run-dependent lives here so the rest is reproducible
            "timing": {"started_at": self.started_at, "wall_time_s": self.wall_time_s},
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")


def _guarded(traj_id: str, fn: Callable[[], int]) -> TrajectoryStatus:
    try:
        return TrajectoryStatus(traj_id, "ok", outputs=fn())
    except TrajectorySkipped as exc:
        log.warning("skipping %s: %s", traj_id, exc)
        return TrajectoryStatus(traj_id, "skipped", str(exc))
    except (PeekError, OSError, ValueError) as exc:
        log.error("failed %s: %s", traj_id, exc)
        return TrajectoryStatus(traj_id, "failed", f"{type(exc).__name__}: {exc}")


def annotate_one(traj_dir: str, config: PipelineConfig) -> TrajectoryStatus:
    """Annotate one trajectory directory and write its ``annotations.jsonl``."""
    path = Path(traj_dir)

    def work() -> int:
        result = run_pipeline(load_trajectory(path, load_frames=False), config)
        write_annotations(path / ANNOTATIONS_FILE, result.bundles)
        return len(result.bundles)

    return _guarded(path.name, work)


def run_batch(subcommand: str, dirs: Sequence[Path], worker: Callable[..., TrajectoryStatus],
              config: PipelineConfig, jobs: int = 1) -> RunManifest:
    """Run ``worker(dir, config)`` for every directory; results come back sorted by id."""
    started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    args = [str(d) for d in dirs]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            statuses = list(pool.map(worker, args, [config] * len(args)))
    else:
        statuses = [worker(a, config) for a in args]
    statuses.sort(key=lambda s: s.traj_id)
    return RunManifest(subcommand, config.to_dict(), statuses, started, round(time.perf_counter() - t0, 3))


def annotate_dataset(root: str | Path, config: PipelineConfig = PipelineConfig(), jobs: int = 1) -> RunManifest:
    return run_batch("annotate", list_trajectory_dirs(root), annotate_one, config, jobs)
