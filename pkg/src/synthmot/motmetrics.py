"""CLEAR MOT evaluation with ignore regions.

Matching uses IoU >= threshold. Correspondences from the previous frame are
kept while they still overlap enough; the rest is an optimal max-IoU
assignment. Hypotheses left over on an ignored ground-truth box are dropped
(one per ignored box, greedy by IoU) instead of counting as false positives.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .track import iou_matrix

METRIC_COLUMNS = ("MOTA", "MOTP", "MT", "ML", "I", "F", "P", "R")
MT_FRACTION = 0.8
ML_FRACTION = 0.2


@dataclass(frozen=True)
class MotReport:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    idsw: int = 0
    frag: int = 0
    total_gt: int = 0
    iou_sum: float = 0.0
    n_trajectories: int = 0
    n_mostly_tracked: int = 0
    n_mostly_lost: int = 0

    @property
    def MOTA(self) -> float:
        # without ground truth every error counts in full
        return 1.0 - (self.fn + self.fp + self.idsw) / max(self.total_gt, 1)

    @property
    def MOTP(self) -> float:
        return self.iou_sum / self.tp if self.tp else 0.0

    @property
    def MT(self) -> float:
        return self.n_mostly_tracked / self.n_trajectories if self.n_trajectories else 0.0

    @property
    def ML(self) -> float:
        return self.n_mostly_lost / self.n_trajectories if self.n_trajectories else 0.0

    @property
    def IDSW(self) -> int:
        return self.idsw

    @property
    def FRAG(self) -> int:
        return self.frag

    @property
    def P(self) -> float:
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def R(self) -> float:
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def F1(self) -> float:
        p, r = self.P, self.R
        return 2 * p * r / (p + r) if p + r else 0.0

    def metrics(self) -> dict:
        return {
            "MOTA": self.MOTA, "MOTP": self.MOTP, "MT": self.MT, "ML": self.ML,
            "I": self.idsw, "F": self.frag, "P": self.P, "R": self.R, "F1": self.F1,
        }

    def to_dict(self) -> dict:
        return {"metrics": self.metrics(), "tallies": dataclasses.asdict(self)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "MotReport":
        return cls(**d["tallies"])


def aggregate(reports: Iterable[MotReport]) -> MotReport:
    """Micro-average: sum the raw tallies, ratios follow."""
    fields = [f.name for f in dataclasses.fields(MotReport)]
    totals = {f: 0 for f in fields}
    for r in reports:
        for f in fields:
            totals[f] += getattr(r, f)
    return MotReport(**totals)


def match_frame(
    gt_boxes: Mapping[int, tuple],
    hyp_boxes: Mapping[int, tuple],
    prior: Mapping[int, int] | None = None,
    iou_threshold: float = 0.5,
    ignored: Mapping[int, tuple] | None = None,
) -> tuple[dict[int, int], list[int], list[int], dict[int, float]]:
    """One frame of CLEAR MOT matching.

    ``gt_boxes``/``hyp_boxes`` map ids to boxes, ``prior`` maps gt id to the hyp
    id it was matched with most recently, ``ignored`` holds ignored gt boxes.
    Returns ``(matches gt->hyp, false-positive hyp ids, missed gt ids, iou per
    matched gt)``.
    """
    prior = prior or {}
    ignored = ignored or {}
    matches: dict[int, int] = {}
    ious: dict[int, float] = {}
    for g, h in prior.items():
        if g in gt_boxes and h in hyp_boxes and h not in matches.values():
            v = float(iou_matrix(gt_boxes[g], hyp_boxes[h])[0, 0])
            if v >= iou_threshold:
                matches[g] = h
                ious[g] = v
    g_rest = [g for g in gt_boxes if g not in matches]
    used = set(matches.values())
    h_rest = [h for h in hyp_boxes if h not in used]
    if g_rest and h_rest:
        m = iou_matrix([gt_boxes[g] for g in g_rest], [hyp_boxes[h] for h in h_rest])
        weight = np.where(m >= iou_threshold, m, 0.0)
        rows, cols = linear_sum_assignment(weight, maximize=True)
        for r, c in zip(rows, cols):
            if m[r, c] >= iou_threshold:
                matches[g_rest[r]] = h_rest[c]
                ious[g_rest[r]] = float(m[r, c])
    used = set(matches.values())
    h_rest = [h for h in hyp_boxes if h not in used]
    if ignored and h_rest:
        ig = list(ignored)
        m = iou_matrix([ignored[g] for g in ig], [hyp_boxes[h] for h in h_rest])
        pairs = sorted(
            ((-m[a, b], a, b) for a, b in zip(*np.nonzero(m >= iou_threshold))),
        )
        taken_g, taken_h = set(), set()
        for _, a, b in pairs:
            if a not in taken_g and b not in taken_h:
                taken_g.add(a)
                taken_h.add(b)
        h_rest = [h for k, h in enumerate(h_rest) if k not in taken_h]
    missed = [g for g in gt_boxes if g not in matches]
    return matches, h_rest, missed, ious


def evaluate(gt_rows: Sequence, tracks: Sequence, iou_threshold: float = 0.5, frames=None) -> MotReport:
    """CLEAR MOT over a sequence.

    ``gt_rows`` are ``GtBox2D``-like rows (frame, track_id, box, ignore);
    ``tracks`` are ``Track``-like objects (id, boxes of (frame, box)).
    """
    gt_by_frame: dict[int, dict[int, tuple]] = {}
    ig_by_frame: dict[int, dict[int, tuple]] = {}
    for r in gt_rows:
        target = ig_by_frame if r.ignore else gt_by_frame
        target.setdefault(r.frame, {})[r.track_id] = r.box
    hyp_by_frame: dict[int, dict[int, tuple]] = {}
    for t in tracks:
        for b in t.boxes:
            hyp_by_frame.setdefault(b.frame, {})[t.id] = b.box
    all_frames = set(gt_by_frame) | set(ig_by_frame) | set(hyp_by_frame)
    if frames is not None:
        frames = sorted(frames)
        if not all_frames <= set(frames):
            raise ValueError("ground truth or hypotheses fall outside the evaluated frame range")
    else:
        frames = sorted(all_frames)

    tp = fp = fn = idsw = 0
    iou_sum = 0.0
    last_match: dict[int, int] = {}
    history: dict[int, list[bool]] = {}
    for f in frames:
        gts = gt_by_frame.get(f, {})
        hyps = hyp_by_frame.get(f, {})
        matches, fps, missed, ious = match_frame(
            gts, hyps, last_match, iou_threshold, ig_by_frame.get(f)
        )
        for g, h in matches.items():
            if g in last_match and last_match[g] != h:
                idsw += 1
            last_match[g] = h
            iou_sum += ious[g]
        tp += len(matches)
        fp += len(fps)
        fn += len(missed)
        for g in gts:
            history.setdefault(g, []).append(g in matches)

    frag = mt = ml = 0
    for states in history.values():
        ratio = sum(states) / len(states)
        mt += ratio >= MT_FRACTION
        ml += ratio <= ML_FRACTION
        tracked_before = False
        for prev, cur in zip(states, states[1:]):
            tracked_before |= prev
            if cur and not prev and tracked_before:
                frag += 1
    total_gt = sum(len(v) for v in gt_by_frame.values())
    return MotReport(tp, fp, fn, idsw, frag, total_gt, iou_sum, len(history), mt, ml)


# ---------------------------------------------------------------------------
# Output


def format_table(
    rows: Sequence[tuple[str, Mapping[str, float]]], signed: bool | Sequence[bool] = False
) -> str:
    """Aligned text table with columns ``MOTA MOTP MT ML I F P R``.

    ``signed`` (for delta rows) is one flag for all rows or one flag per row.
    """
    flags = [signed] * len(rows) if isinstance(signed, bool) else list(signed)
    if len(flags) != len(rows):
        raise ValueError("need one signed flag per row")
    name_w = max([len("name")] + [len(n) for n, _ in rows])
    head = f"{'name':<{name_w}} " + " ".join(f"{c:>9}" for c in METRIC_COLUMNS)
    lines = [head]
    for (name, m), sign in zip(rows, flags):
        cells = []
        for c in METRIC_COLUMNS:
            v = m[c]
            if c in ("I", "F"):
                cells.append(f"{int(v):>+9d}" if sign else f"{int(v):>9d}")
            else:
                # round first so that -0.04% does not print as "-0.0%"
                pct = round(100 * v, 1) + 0.0
                cells.append(f"{pct:>+8.1f}%" if sign else f"{pct:>8.1f}%")
        lines.append(f"{name:<{name_w}} " + " ".join(cells))
    return "\n".join(lines) + "\n"


def parse_table(text: str) -> list[tuple[str, dict[str, float]]]:
    lines = [l for l in text.splitlines() if l.strip()]
    cols = lines[0].split()[1:]
    out = []
    for line in lines[1:]:
        parts = line.split()
        vals = {}
        for c, p in zip(cols, parts[1:]):
            vals[c] = float(p[:-1]) / 100.0 if p.endswith("%") else float(int(p))
        out.append((parts[0], vals))
    return out


def report_json(report: MotReport, **extra) -> str:
    return json.dumps({**report.to_dict(), **extra}, indent=1, sort_keys=True) + "\n"
