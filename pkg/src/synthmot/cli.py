"""Command-line entry point: ``synthmot <command> ...``.

Exit codes: 0 success, 1 usage error, 2 data or validation error,
3 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import traceback
from pathlib import Path

from . import annotate, detsim, motmetrics, track
from .config import ConfigError, ExperimentConfig, load_config, save_config, scene_name
from .experiments import hyperparams_from_file, run_calibration, run_sweep, write_sequence_outputs
from .pipeline import SequenceData, render_to_disk
from .scene import (
    MOTION_STYLES, CameraIntrinsics, SceneError, SceneGenerationError, VariationSpec,
    apply_variation, generate_seed_scene, load_scene, save_scene,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config(args) -> ExperimentConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else ExperimentConfig()
    if getattr(args, "seed", None) is not None:
        cfg = cfg.with_seed(args.seed)
    if getattr(args, "resolution", None):
        cfg = dataclasses.replace(cfg, resolution=tuple(args.resolution))
    return cfg


def _write_config(cfg: ExperimentConfig, out: Path, command: dict) -> None:
    save_config(cfg, out / "config.json", command)


# ---------------------------------------------------------------------------
# Commands. Each ``_run_*`` takes a resolved config plus the recorded command,
# so ``replay`` can repeat a run from its config.json alone.


def _run_gen(cfg: ExperimentConfig, cmd: dict, jobs: int) -> int:
    intr = CameraIntrinsics()
    if cfg.resolution:
        intr = intr.resized(*cfg.resolution)
    scene = generate_seed_scene(cmd["seed"], cmd["objects"], cmd["frames"], cmd["style"], intrinsics=intr)
    out = Path(cmd["out"])
    save_scene(scene, out)
    save_config(cfg, out.with_suffix(".config.json"), cmd)
    print(f"wrote {out} ({scene.frame_count} frames, {len(scene.objects)} objects)")
    return EXIT_OK


def _run_render(cfg: ExperimentConfig, cmd: dict, jobs: int) -> int:
    scene = cfg.prepare_scene(load_scene(cmd["scene"]))
    variation = VariationSpec.parse(cmd["variation"])
    out = Path(cmd["out"]) / scene_name(cmd["scene"]) / variation.name
    rows, stats = render_to_disk(apply_variation(scene, variation), out, cfg.eval_filter, jobs)
    _write_config(cfg, out, cmd)
    w, h = scene.intrinsics.width, scene.intrinsics.height
    print(f"rendered {stats.frames} frames at {w}x{h} in {stats.seconds:.2f} s: {stats.fps:.2f} FPS")
    print(f"{len(rows)} gt rows, {sum(not r.ignore for r in rows)} evaluated -> {out}")
    return EXIT_OK


def _run_track_eval(cfg: ExperimentConfig, cmd: dict, jobs: int) -> int:
    gt = annotate.read_gt(cmd["gt"])
    if cmd.get("detections"):
        dets = detsim.read_detections(cmd["detections"])
    else:
        scene = cfg.prepare_scene(load_scene(cmd["scene"])) if cmd.get("scene") else None
        intr = scene.intrinsics if scene else CameraIntrinsics()
        if cfg.resolution and scene is None:
            intr = intr.resized(*cfg.resolution)
        n = scene.frame_count if scene else max((r.frame for r in gt), default=-1) + 1
        frames = range(n)
        dets = detsim.simulate_detections(gt, cfg.detector, intr, frames)
    gt = annotate.refilter(gt, cfg.eval_filter)
    seq = SequenceData(Path(cmd["gt"]).stem, None, gt, dets)
    tracks = track.track(dets, cfg.hyperparams)
    report = motmetrics.evaluate(gt, tracks, cfg.iou_threshold)
    out = Path(cmd["out"])
    write_sequence_outputs(seq, tracks, report, out)
    _write_config(cfg, out, cmd)
    print(motmetrics.format_table([(seq.name, report.metrics())]), end="")
    return EXIT_OK


def _run_sweep(cfg: ExperimentConfig, cmd: dict, jobs: int) -> int:
    out = Path(cmd["out"])
    result = run_sweep(cfg, out, jobs)
    _write_config(cfg, out, cmd)
    print(result.table(), end="")
    return EXIT_OK


def _run_calibrate(cfg: ExperimentConfig, cmd: dict, jobs: int) -> int:
    out = Path(cmd["out"])
    report = run_calibration(cfg, out, jobs)
    _write_config(cfg, out, cmd)
    print(report.table(), end="")
    print(f"objective {report.objective:.6g}")
    return EXIT_OK


RUNNERS = {
    "gen": _run_gen,
    "render": _run_render,
    "track-eval": _run_track_eval,
    "sweep": _run_sweep,
    "calibrate": _run_calibrate,
}


def _abs(p) -> str | None:
    return str(Path(p).resolve()) if p else None


def _command(args) -> tuple[ExperimentConfig, dict]:
    cfg = _config(args)
    name = args.command
    if name == "gen":
        return cfg, {"name": name, "seed": args.seed if args.seed is not None else 0,
                     "style": args.style, "objects": args.objects, "frames": args.frames,
                     "out": _abs(args.out)}
    if name == "render":
        variation = VariationSpec.parse(json.loads(args.variation) if args.variation.startswith("{") else args.variation)
        return cfg, {"name": name, "scene": _abs(args.scene), "variation": variation.to_dict(),
                     "out": _abs(args.out)}
    if name == "track-eval":
        if args.hyperparams:
            cfg = dataclasses.replace(cfg, hyperparams=hyperparams_from_file(args.hyperparams, args.pair))
        if args.detector:
            d = json.loads(Path(args.detector).read_text())
            if args.seed is not None:
                d["seed"] = args.seed
            cfg = dataclasses.replace(cfg, detector=detsim.DetectorModel.from_dict(d))
        return cfg, {"name": name, "gt": _abs(args.gt), "detections": _abs(args.detections),
                     "scene": _abs(args.scene), "out": _abs(args.out)}
    if name in ("sweep", "calibrate"):
        if args.scenes:
            cfg = dataclasses.replace(cfg, scenes=tuple(_abs(s) for s in args.scenes))
        if name == "sweep" and args.variations:
            cfg = dataclasses.replace(cfg, variations=tuple(VariationSpec(v) for v in args.variations))
        if name == "calibrate" and args.budget is not None:
            cfg = dataclasses.replace(cfg, budget=args.budget)
        if not cfg.scenes:
            raise UsageError("no scenes: pass scene files or a config listing them")
        for s in cfg.scenes:
            if not Path(s).is_file():
                raise ConfigError(f"scene file not found: {s}")
        out = args.out or cfg.out
        return dataclasses.replace(cfg, out=_abs(out)), {"name": name, "out": _abs(out)}
    raise UsageError(f"unknown command {name!r}")


def _replay(args) -> tuple[ExperimentConfig, dict]:
    d = json.loads(Path(args.config_file).read_text())
    if "command" not in d:
        raise ConfigError(f"{args.config_file}: no recorded command")
    cmd = dict(d["command"])
    cfg = ExperimentConfig.from_dict(d, Path(args.config_file).parent)
    if args.out:
        cmd["out"] = _abs(args.out)
        if cmd["name"] in ("sweep", "calibrate"):
            cfg = dataclasses.replace(cfg, out=cmd["out"])
    return cfg, cmd


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="synthmot", description="Synthetic tracking benchmark pipeline.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, config=True):
        sp.add_argument("--seed", type=int, help="master seed (optimizer and detector streams)")
        sp.add_argument("--jobs", type=int, default=1, help="worker processes (outputs do not depend on it)")
        if config:
            sp.add_argument("--config", help="experiment config (JSON)")
            sp.add_argument("--resolution", type=int, nargs=2, metavar=("W", "H"),
                            help="render at this size; intrinsics are rescaled")

    g = sub.add_parser("gen", help="generate a procedural seed scene")
    common(g, config=False)
    g.add_argument("--style", choices=MOTION_STYLES, default="urban")
    g.add_argument("--objects", type=int, default=5)
    g.add_argument("--frames", type=int, default=120)
    g.add_argument("--resolution", type=int, nargs=2, metavar=("W", "H"))
    g.add_argument("--out", required=True, help="scene file to write")

    r = sub.add_parser("render", help="render all passes and ground truth of one variation")
    common(r)
    r.add_argument("scene")
    r.add_argument("--variation", default="clone", help="variation kind or JSON VariationSpec")
    r.add_argument("--out", required=True, help="output root; writes OUT/<scene>/<variation>/")

    t = sub.add_parser("track-eval", help="track detections and score against ground truth")
    common(t)
    t.add_argument("--gt", required=True, help="gt.txt written by render (meta sidecar next to it)")
    src = t.add_mutually_exclusive_group()
    src.add_argument("--detections", help="detection file; otherwise detections are simulated")
    src.add_argument("--detector", help="DetectorModel JSON for simulated detections")
    t.add_argument("--scene", help="scene file supplying intrinsics for simulated detections")
    t.add_argument("--hyperparams", help="HyperParams JSON or best_params.json")
    t.add_argument("--pair", help="pair name when best_params.json holds several")
    t.add_argument("--out", required=True)

    s = sub.add_parser("sweep", help="variation study with fixed tracker settings")
    common(s)
    s.add_argument("scenes", nargs="*")
    s.add_argument("--variations", nargs="+", help="variation kinds (clone is always included)")
    s.add_argument("--out")

    c = sub.add_parser("calibrate", help="gap-objective hyperparameter search")
    common(c)
    c.add_argument("scenes", nargs="*")
    c.add_argument("--budget", type=int)
    c.add_argument("--out")

    rp = sub.add_parser("replay", help="repeat a run from its config.json")
    rp.add_argument("config_file")
    rp.add_argument("--jobs", type=int, default=1)
    rp.add_argument("--out", help="write elsewhere instead of the recorded location")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.jobs < 1:
            raise UsageError("--jobs must be >= 1")
        cfg, cmd = _replay(args) if args.command == "replay" else _command(args)
        return RUNNERS[cmd["name"]](cfg, cmd, args.jobs)
    except UsageError as e:
        print(f"synthmot: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (SceneError, SceneGenerationError, ConfigError, ValueError,
            FileNotFoundError, IsADirectoryError, PermissionError, json.JSONDecodeError) as e:
        print(f"synthmot: error: {e}", file=sys.stderr)
        return EXIT_DATA
    except Exception:
        traceback.print_exc()
        print("synthmot: internal error", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
