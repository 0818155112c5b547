"""End-to-end sequence processing shared by the CLI, sweeps and calibration."""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

from . import annotate, detsim, motmetrics, track
from .annotate import EvalFilter, GtBox2D
from .render import io as rio
from .render.frame import render_frame, render_instance
from .scene import SceneDescription, VariationSpec, apply_variation


def _frame_job(args):
    scene, t, eval_filter, out_dir = args
    if out_dir is None:
        instance = render_instance(scene, t)
    else:
        buf = render_frame(scene, t)
        rio.write_frame(out_dir, t, buf)
        instance = buf.instance
    return annotate.annotate_frame(scene, t, instance, eval_filter)


def _run_frames(scene, eval_filter, out_dir, jobs):
    eval_filter = annotate.effective_filter(scene, eval_filter)
    tasks = [(scene, t, eval_filter, out_dir) for t in range(scene.frame_count)]
    if jobs <= 1:
        results = [_frame_job(a) for a in tasks]
    else:
        with ProcessPoolExecutor(jobs) as ex:
            results = list(ex.map(_frame_job, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    rows = [r for frame_rows in results for r in frame_rows]
    return sorted(rows, key=lambda r: (r.frame, r.track_id))


def ground_truth(scene: SceneDescription, eval_filter: EvalFilter | None = None, jobs: int = 1) -> list[GtBox2D]:
    """Annotate every frame from its instance pass; nothing is written."""
    return _run_frames(scene, eval_filter or EvalFilter(), None, jobs)


@dataclass
class RenderStats:
    frames: int
    seconds: float

    @property
    def fps(self) -> float:
        return self.frames / self.seconds if self.seconds > 0 else float("inf")


def render_to_disk(
    scene: SceneDescription, out_dir, eval_filter: EvalFilter | None = None, jobs: int = 1
) -> tuple[list[GtBox2D], RenderStats]:
    """Write all four passes plus ground-truth files under ``out_dir``."""
    out_dir = Path(out_dir)
    eval_filter = eval_filter or EvalFilter()
    start = time.perf_counter()
    rows = _run_frames(scene, eval_filter, out_dir, jobs)
    (out_dir / "gt").mkdir(parents=True, exist_ok=True)
    annotate.write_gt(rows, out_dir / "gt" / "gt.txt")
    return rows, RenderStats(scene.frame_count, time.perf_counter() - start)


@dataclass
class SequenceData:
    """Everything about one sequence that does not depend on tracker settings."""

    name: str
    scene: SceneDescription
    gt: list[GtBox2D]
    detections: list[detsim.Detection]


def prepare_sequence(
    name: str,
    scene: SceneDescription,
    variation: VariationSpec | str = "clone",
    detector: detsim.DetectorModel | None = None,
    eval_filter: EvalFilter | None = None,
    jobs: int = 1,
) -> SequenceData:
    varied = apply_variation(scene, VariationSpec.parse(variation))
    gt = ground_truth(varied, eval_filter, jobs)
    dets = detsim.simulate_detections(
        gt, detector or detsim.DetectorModel(), varied.intrinsics, range(varied.frame_count)
    )
    return SequenceData(name, varied, gt, dets)


def track_and_evaluate(
    seq: SequenceData, hp: track.HyperParams, iou_threshold: float = 0.5
) -> tuple[list[track.Track], motmetrics.MotReport]:
    tracks = track.track(seq.detections, hp)
    report = motmetrics.evaluate(seq.gt, tracks, iou_threshold, frames=range(seq.scene.frame_count))
    return tracks, report


def map_jobs(fn: Callable, items: Sequence, jobs: int = 1) -> list:
    """Ordered map, in worker processes when ``jobs > 1``."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(min(jobs, len(items))) as ex:
        return list(ex.map(fn, items))
