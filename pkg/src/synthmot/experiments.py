"""Variation sweeps and gap calibration runs driven by an ExperimentConfig."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import annotate, calibrate, detsim, motmetrics, track
from .config import ExperimentConfig
from .motmetrics import MotReport
from .pipeline import SequenceData, map_jobs, prepare_sequence, track_and_evaluate
from .scene import SceneDescription, VariationSpec

REFERENCE = "clone"


@dataclass(frozen=True)
class _PrepareJob:
    """Picklable closure for preparing sequences in worker processes."""

    detector: detsim.DetectorModel
    eval_filter: annotate.EvalFilter
    frame_jobs: int

    def __call__(self, item) -> SequenceData:
        name, scene, variation = item
        return prepare_sequence(name, scene, variation, self.detector, self.eval_filter, self.frame_jobs)


def prepare_all(
    cfg: ExperimentConfig, items: Sequence[tuple[str, SceneDescription, VariationSpec]], jobs: int = 1
) -> list[SequenceData]:
    """Render GT and simulate detections for every (name, scene, variation).

    With several sequences the workers split over sequences, otherwise over
    frames; results do not depend on ``jobs`` either way.
    """
    across = jobs > 1 and len(items) > 1
    job = _PrepareJob(cfg.detector, cfg.eval_filter, 1 if across else jobs)
    return map_jobs(job, list(items), jobs if across else 1)


def write_sequence_outputs(seq: SequenceData, tracks, report: MotReport, root: Path) -> None:
    for sub in ("gt", "det", "tracks", "reports"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    annotate.write_gt(seq.gt, root / "gt" / "gt.txt")
    detsim.write_detections(seq.detections, root / "det" / "detections.txt")
    track.write_tracks(tracks, root / "tracks" / "tracks.txt")
    (root / "reports" / "report.txt").write_text(motmetrics.format_table([(seq.name, report.metrics())]))
    (root / "reports" / "report.json").write_text(motmetrics.report_json(report))


# ---------------------------------------------------------------------------
# Sweep


@dataclass
class SweepResult:
    variations: list[str]
    per_scene: dict[str, dict[str, MotReport]]
    hyperparams: track.HyperParams
    detector: detsim.DetectorModel
    eval_filter: annotate.EvalFilter

    def totals(self) -> dict[str, MotReport]:
        return {
            v: motmetrics.aggregate(reports[v] for reports in self.per_scene.values())
            for v in self.variations
        }

    def deltas(self) -> dict[str, dict]:
        tot = self.totals()
        return {v: calibrate.deltas(tot[REFERENCE], tot[v]) for v in self.variations}

    def table(self) -> str:
        tot = self.totals()
        d = self.deltas()
        rows = [(REFERENCE, tot[REFERENCE].metrics())]
        rows += [(v, d[v]) for v in self.variations if v != REFERENCE]
        return motmetrics.format_table(rows, [False] + [True] * (len(rows) - 1))

    def to_dict(self) -> dict:
        tot = self.totals()
        d = self.deltas()
        return {
            "reference": REFERENCE,
            "hyperparams": self.hyperparams.to_dict(),
            "detector": self.detector.to_dict(),
            "eval_filter": self.eval_filter.to_dict(),
            "rows": [
                {"variation": v, "report": tot[v].to_dict(), "deltas": d[v]} for v in self.variations
            ],
            "scenes": {
                s: {v: r.to_dict() for v, r in reports.items()} for s, reports in self.per_scene.items()
            },
        }


def _with_reference(variations: Sequence[VariationSpec]) -> list[VariationSpec]:
    vs = list(variations)
    if REFERENCE not in [v.name for v in vs]:
        vs.insert(0, VariationSpec(REFERENCE))
    return vs


def run_sweep(cfg: ExperimentConfig, out: Path | None = None, jobs: int = 1) -> SweepResult:
    """Track every variation of every scene with the same fixed hyperparameters."""
    scenes = cfg.load_scenes()
    if not scenes:
        raise ValueError("sweep needs at least one scene")
    variations = _with_reference(cfg.variations)
    items = [(f"{s}/{v.name}", scene, v) for s, scene in scenes for v in variations]
    seqs = prepare_all(cfg, items, jobs)
    per_scene: dict[str, dict[str, MotReport]] = {s: {} for s, _ in scenes}
    for (name, _, v), seq in zip(items, seqs):
        tracks, report = track_and_evaluate(seq, cfg.hyperparams, cfg.iou_threshold)
        per_scene[name.split("/")[0]][v.name] = report
        if out is not None:
            write_sequence_outputs(seq, tracks, report, Path(out) / name)
    result = SweepResult([v.name for v in variations], per_scene, cfg.hyperparams, cfg.detector, cfg.eval_filter)
    if out is not None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(result.table())
        (out / "report.json").write_text(json.dumps(result.to_dict(), indent=1, sort_keys=True) + "\n")
    return result


def read_sweep_report(path) -> list[tuple[str, dict[str, float]]]:
    return motmetrics.parse_table(Path(path).read_text())


# ---------------------------------------------------------------------------
# Calibration


def run_calibration(cfg: ExperimentConfig, out: Path | None = None, jobs: int = 1) -> calibrate.GapReport:
    """Gap protocol over every configured variation pair of every scene."""
    scenes = cfg.load_scenes()
    if not scenes:
        raise ValueError("calibration needs at least one scene")
    if not cfg.pairs:
        raise ValueError("calibration needs at least one variation pair")
    by_name = {v.name: v for v in cfg.variations}
    needed: list[tuple[str, SceneDescription, VariationSpec]] = []
    for s, scene in scenes:
        for a, b in cfg.pairs:
            for v in (a, b):
                spec = by_name.get(v) or VariationSpec.parse(v)
                name = f"{s}/{spec.name}"
                if name not in [n for n, _, _ in needed]:
                    needed.append((name, scene, spec))
    seqs = dict(zip([n for n, _, _ in needed], prepare_all(cfg, needed, jobs)))
    pairs = [(seqs[f"{s}/{a}"], seqs[f"{s}/{b}"]) for s, _ in scenes for a, b in cfg.pairs]
    report = calibrate.run_gap_protocol(
        pairs, cfg.param_space, cfg.budget, cfg.seed, cfg.strategy, cfg.mode,
        cfg.hyperparams, cfg.iou_threshold, jobs,
    )
    if out is not None:
        write_gap_report(report, cfg, Path(out))
    return report


def write_gap_report(report: calibrate.GapReport, cfg: ExperimentConfig, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    lines = [report.table(), f"objective {report.objective!r}", f"formula {report.formula}", ""]
    for p in report.pairs:
        d = p.deltas
        lines.append(f"{p.name}: " + " ".join(f"d{k}={d[k]:+.6g}" for k in calibrate.METRICS))
    (out / "report.txt").write_text("\n".join(lines) + "\n")
    (out / "report.json").write_text(calibrate.gap_report_json(report))
    (out / "history.csv").write_text(report.history_csv(cfg.param_space))
    (out / "best_params.json").write_text(json.dumps(report.best_params(), indent=1, sort_keys=True) + "\n")


def hyperparams_from_file(path, pair: str | None = None) -> track.HyperParams:
    """Load tracker settings from a HyperParams dict or a ``best_params.json``."""
    d = json.loads(Path(path).read_text())
    if "mode" in d:
        if d["mode"] == "global":
            d = d["params"]
        else:
            choices = d["pairs"]
            if pair is None:
                if len(choices) != 1:
                    raise ValueError(f"{path}: several pairs, choose one of {sorted(choices)}")
                pair = next(iter(choices))
            if pair not in choices:
                raise ValueError(f"{path}: no pair {pair!r}")
            d = choices[pair]
    return track.HyperParams.from_dict(d)
