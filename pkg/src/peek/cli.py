"""Command-line entry point: ``peek {synth,annotate,segment,render,eval}``."""

from __future__ import annotations

import argparse
import functools
import json
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .annotate import run_pipeline
from .batch import RunManifest, TrajectoryStatus, _guarded, annotate_one, run_batch
from .config import PipelineConfig, coerce_values, read_config_file
from .dataset import (ANNOTATIONS_FILE, frame_path, list_trajectory_dirs, load_trajectory, read_annotations,
                      read_frame, save_record, write_annotations, write_frame)
from .errors import ConfigError, DatasetError, PeekError
from .metrics import corpus, evaluate_corpus
from .oracle import SceneScript, generate_record, oracle_annotations, oracle_bundle_at, random_script
from .render import RenderSpec, compose
from .scheduler import run_stream
from .types import AnnotationBundle

log = logging.getLogger("peek")

GROUND_TRUTH_FILE = "ground_truth.json"
ORACLE_FILE = "oracle_annotations.jsonl"

# flag -> PipelineConfig field
CONFIG_FLAGS = {
    "threshold": ("movement_threshold", float),
    "window": ("stop_window", int),
    "still_eps": ("still_eps", float),
    "grid_side": ("grid_side", int),
    "rdp_path": ("rdp_eps_path", float),
    "rdp_mask": ("rdp_eps_mask", float),
    "mask_edge": ("mask_edge_frac", float),
    "h_label": ("label_period", int),
    "h_rollout": ("rollout_period", int),
    "trim": ("trim_frac", float),
    "resamples": ("resample_count", int),
    "raster": ("raster_size", int),
    "seed": ("seed", int),
}


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("pipeline configuration (flags override --config)")
    g.add_argument("--config", type=Path, help="flat 'key = value' file of PipelineConfig fields")
    for flag, (name, kind) in CONFIG_FLAGS.items():
        g.add_argument("--" + flag.replace("_", "-"), dest=flag, type=kind, default=None,
                       help=f"{name} (default {getattr(PipelineConfig(), name)})")
    p.add_argument("--jobs", type=int, default=int(os.environ.get("PEEK_JOBS", "1")),
                   help="worker processes (default $PEEK_JOBS or 1)")
    p.add_argument("--keep-going", action="store_true", help="exit 0 even if some trajectories fail")
    p.add_argument("--log-level", default="INFO")
    return p


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    parser = argparse.ArgumentParser(prog="peek", description=__doc__)
    parser.add_argument("--version", action="version", version=f"peek {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", parents=[parent], help="write a synthetic dataset with ground truth")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--grasps", choices=["0", "1", "2", "mixed"], default="mixed")
    p.add_argument("--noise", type=float, default=0.0)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--size", type=int, default=128, help="frame width and height in pixels")

    p = sub.add_parser("annotate", parents=[parent], help="write annotations.jsonl per trajectory")
    p.add_argument("--root", type=Path, required=True)

    p = sub.add_parser("segment", parents=[parent], help="dump stop counts and spans as JSON")
    p.add_argument("--root", type=Path, required=True)
    p.add_argument("--out", type=Path, help="write JSON here instead of stdout")

    p = sub.add_parser("render", parents=[parent], help="draw annotations onto frames")
    p.add_argument("--root", type=Path, required=True)
    p.add_argument("--line-width", type=int, default=RenderSpec.line_width)
    p.add_argument("--closed-loop", action="store_true",
                   help="re-query a provider every H rollout frames instead of replaying labels")
    p.add_argument("--provider", choices=["replay", "oracle"], default="replay")

    p = sub.add_parser("eval", parents=[parent], help="compare predicted and reference annotations")
    p.add_argument("--pred", type=Path, required=True, help="annotations file or dataset root")
    p.add_argument("--gt", type=Path, required=True, help="annotations file or dataset root")
    p.add_argument("--pred-name", default=ANNOTATIONS_FILE, help="file name inside each trajectory dir")
    p.add_argument("--gt-name", default=ANNOTATIONS_FILE, help="file name inside each trajectory dir")
    p.add_argument("--report", type=Path, help="write the JSON report here")
    return parser


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    values: dict = {}
    if args.config is not None:
        values.update(coerce_values(read_config_file(args.config)))
    for flag, (name, _) in CONFIG_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            values[name] = v
    return PipelineConfig().replace(**values)


def _finish(manifest: RunManifest, root: Path, keep_going: bool) -> int:
    manifest.write(root / f"{manifest.subcommand}_manifest.json")
    bad = [t for t in manifest.trajectories if not t.ok]
    log.info("%s: %d trajectories, %d ok, %d not ok", manifest.subcommand,
             len(manifest.trajectories), len(manifest.trajectories) - len(bad), len(bad))
    return 0 if keep_going or not bad else 1


# -- synth ---------------------------------------------------------------------

def _synth_one(script_json: str, out: str, config: PipelineConfig) -> TrajectoryStatus:
    script = SceneScript.from_json(json.loads(script_json))

    def work() -> int:
        record, gt = generate_record(script)
        traj_dir = save_record(out, record)
        (traj_dir / GROUND_TRUTH_FILE).write_text(json.dumps(gt.to_json(script)) + "\n")
        write_annotations(traj_dir / ORACLE_FILE, oracle_annotations(script, config))
        return record.trajectory.length

    return _guarded(script.name, work)


def cmd_synth(args, config: PipelineConfig) -> int:
    args.out.mkdir(parents=True, exist_ok=True)
    scripts = []
    for i in range(args.count):
        seed = config.seed + i
        n = (i % 2) + 1 if args.grasps == "mixed" else int(args.grasps)
        s = random_script(seed, n, noise=args.noise, dropout=args.dropout, grid_side=config.grid_side,
                          width=args.size, height=args.size)
        scripts.append(json.dumps(s.to_json()))
    worker = functools.partial(_synth_worker, out=str(args.out))
    manifest = run_batch("synth", scripts, worker, config, args.jobs)
    return _finish(manifest, args.out, args.keep_going)


def _synth_worker(script_json: str, config: PipelineConfig, out: str) -> TrajectoryStatus:
    return _synth_one(script_json, out, config)


# -- annotate / segment ----------------------------------------------------------

def cmd_annotate(args, config: PipelineConfig) -> int:
    manifest = run_batch("annotate", list_trajectory_dirs(args.root), annotate_one, config, args.jobs)
    return _finish(manifest, args.root, args.keep_going)


def cmd_segment(args, config: PipelineConfig) -> int:
    out: dict = {}
    statuses = []
    for d in list_trajectory_dirs(args.root):
        def work(d=d) -> int:
            res = run_pipeline(load_trajectory(d, load_frames=False), config)
            out[d.name] = {
                "num_frames": res.series.num_frames,
                "window": res.series.window,
                "stop_counts": list(res.series.counts),
                "spans": [{"start": s.start, "end": s.end,
                           "section": list(s.source_section) if s.source_section else None}
                          for s in res.spans],
                "kept_tracks": list(res.task.kept_track_ids),
            }
            return len(res.spans)
        statuses.append(_guarded(d.name, work))
    text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    manifest = RunManifest("segment", config.to_dict(), statuses)
    return _finish(manifest, args.root, args.keep_going)


# -- render --------------------------------------------------------------------

def _latest_bundle(bundles: list[AnnotationBundle], t: int, within_span: bool) -> AnnotationBundle | None:
    best = None
    for b in bundles:
        if b.variant != 0 or b.query_frame > t:
            continue
        if within_span and b.span is not None and not b.span[0] <= t < b.span[1]:
            continue
        if best is None or b.query_frame > best.query_frame:
            best = b
    return best


def _render_one(traj_dir: str, config: PipelineConfig, line_width: int, closed_loop: bool,
                provider: str) -> TrajectoryStatus:
    path = Path(traj_dir)
    spec = RenderSpec(line_width=line_width, mask_edge_frac=config.mask_edge_frac)

    def work() -> int:
        record = load_trajectory(path, load_frames=False)
        frames = (read_frame(frame_path(path, i), i) for i in range(record.trajectory.length))
        out_dir = path / ("closed_loop" if closed_loop else "annotated")
        out_dir.mkdir(exist_ok=True)
        written = 0
        if closed_loop:
            if provider == "oracle":
                gt_file = path / GROUND_TRUTH_FILE
                if not gt_file.is_file():
                    raise DatasetError("oracle provider needs ground truth", path.name, str(gt_file))
                script = SceneScript.from_json(json.loads(gt_file.read_text())["script"])
                fn = lambda f: oracle_bundle_at(script, f.index, config)  # noqa: E731
            else:
                bundles = [b for b in read_annotations(path / ANNOTATIONS_FILE) if b.variant == 0]
                if not bundles:
                    raise DatasetError("no annotations to replay", path.name, str(path / ANNOTATIONS_FILE))
                first = min(bundles, key=lambda b: b.query_frame)
                fn = lambda f: _latest_bundle(bundles, f.index, False) or first  # noqa: E731
            for out, _ in run_stream(frames, fn, config.rollout_period, spec):
                write_frame(out_dir / f"{out.index:06d}_annotated.png", out)
                written += 1
            return written
        bundles = read_annotations(path / ANNOTATIONS_FILE)
        for frame in frames:
            b = _latest_bundle(bundles, frame.index, True)
            if b is not None:
                write_frame(out_dir / f"{frame.index:06d}_annotated.png", compose(frame, b, spec))
                written += 1
        return written

    return _guarded(path.name, work)


def cmd_render(args, config: PipelineConfig) -> int:
    worker = functools.partial(_render_one, line_width=args.line_width, closed_loop=args.closed_loop,
                               provider=args.provider)
    manifest = run_batch("render", list_trajectory_dirs(args.root), worker, config, args.jobs)
    return _finish(manifest, args.root, args.keep_going)


# -- eval ----------------------------------------------------------------------

def load_corpus(path: Path, name: str) -> dict:
    if path.is_dir():
        items = []
        for d in list_trajectory_dirs(path):
            f = d / name
            if f.is_file():
                items += [(d.name, b) for b in read_annotations(f)]
        return corpus(items)
    items = []
    with open(path) as f:
        for line in f:
            if line.strip():
                row = json.loads(line)
                items.append((str(row.get("traj", path.parent.name)), AnnotationBundle.from_json(row)))
    return corpus(items)


def cmd_eval(args, config: PipelineConfig) -> int:
    pred = load_corpus(args.pred, args.pred_name)
    gt = load_corpus(args.gt, args.gt_name)
    report = evaluate_corpus(pred, gt, config.mask_edge_frac, config.raster_size)
    text = json.dumps(report.to_json(), indent=2) + "\n"
    if args.report:
        args.report.write_text(text)
    sys.stdout.write(text)
    return 0


COMMANDS = {"synth": cmd_synth, "annotate": cmd_annotate, "segment": cmd_segment,
            "render": cmd_render, "eval": cmd_eval}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.INFO),
                        format="%(asctime)s %(levelname)s %(name)s %(message)s")
    try:
        config = resolve_config(args)
    except ConfigError as exc:
        parser.error(str(exc))
    try:
        return COMMANDS[args.command](args, config)
    except PeekError as exc:
        log.error("%s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
