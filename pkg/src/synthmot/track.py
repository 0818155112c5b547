"""Min-cost-flow tracking-by-detection solved by successive DP shortest paths.

Each detection is a unit-capacity node with cost ``beta * (0.5 - score)``.
Tracks enter at ``entry_cost``, leave at ``exit_cost`` and link detections up
to ``max_skip`` frames apart at cost ``-log(iou * skip_decay ** (gap - 1))``.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .detsim import Detection


@dataclass(frozen=True)
class HyperParams:
    score_threshold: float = 0.3
    entry_cost: float = 1.0
    exit_cost: float = 1.0
    max_skip: int = 3
    skip_decay: float = 0.9
    min_iou: float = 0.3
    detection_cost_scale: float = 2.0

    def __post_init__(self):
        if not 0.0 <= self.score_threshold <= 1.0:
            raise ValueError("score_threshold must lie in [0, 1]")
        if self.entry_cost < 0 or self.exit_cost < 0:
            raise ValueError("entry/exit costs must be >= 0")
        if int(self.max_skip) != self.max_skip or self.max_skip < 1:
            raise ValueError("max_skip must be an integer >= 1")
        if not 0.0 < self.skip_decay <= 1.0:
            raise ValueError("skip_decay must lie in (0, 1]")
        if not 0.0 < self.min_iou < 1.0:
            raise ValueError("min_iou must lie in (0, 1)")
        if self.detection_cost_scale <= 0:
            raise ValueError("detection_cost_scale must be positive")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d) -> "HyperParams":
        d = dict(d or {})
        if "max_skip" in d:
            d["max_skip"] = int(d["max_skip"])
        return cls(**d)


def iou(a, b) -> float:
    iw = min(a[2], b[2]) - max(a[0], b[0])
    ih = min(a[3], b[3]) - max(a[1], b[1])
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = (a[2] - a[0]) * (a[3] - a[1]) + (b[2] - b[0]) * (b[3] - b[1]) - inter
    return inter / union


def iou_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise IoU of (N, 4) and (M, 4) boxes."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    iw = np.minimum(a[:, None, 2], b[None, :, 2]) - np.maximum(a[:, None, 0], b[None, :, 0])
    ih = np.minimum(a[:, None, 3], b[None, :, 3]) - np.maximum(a[:, None, 1], b[None, :, 1])
    inter = np.clip(iw, 0, None) * np.clip(ih, 0, None)
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(inter > 0, inter / union, 0.0)


def transition_cost(det_i: Detection, det_j: Detection, h: HyperParams) -> float | None:
    gap = det_j.frame - det_i.frame
    if not 1 <= gap <= h.max_skip:
        raise ValueError("transition needs 1 <= frame gap <= max_skip")
    s = iou(det_i.box, det_j.box) * h.skip_decay ** (gap - 1)
    if s < h.min_iou or s <= 0:
        return None
    return -math.log(s)


@dataclass
class FlowGraph:
    detections: list[Detection]
    det_cost: np.ndarray
    entry_cost: float
    exit_cost: float
    # predecessors[j] = [(i, cost)] for transition edges v_i -> u_j
    predecessors: list[list[tuple[int, float]]] = field(default_factory=list)

    @property
    def n_transitions(self) -> int:
        return sum(len(p) for p in self.predecessors)

    def edge_counts(self) -> dict:
        n = len(self.detections)
        return {"detection": n, "entry": n, "exit": n, "transition": self.n_transitions}


def build_flow_graph(detections: Sequence[Detection], h: HyperParams) -> FlowGraph:
    dets = [d for d in detections if d.score >= h.score_threshold]
    dets.sort(key=lambda d: d.frame)  # stable: keeps input order within a frame
    det_cost = np.array([h.detection_cost_scale * (0.5 - d.score) for d in dets])
    frames = np.array([d.frame for d in dets], dtype=int)
    boxes = np.array([d.box for d in dets], dtype=float).reshape(-1, 4)
    preds: list[list[tuple[int, float]]] = [[] for _ in dets]
    if dets:
        starts = {f: int(np.searchsorted(frames, f, "left")) for f in np.unique(frames)}
        ends = {f: int(np.searchsorted(frames, f, "right")) for f in starts}
        for f in starts:
            js = slice(starts[f], ends[f])
            for gap in range(1, h.max_skip + 1):
                g = f - gap
                if g not in starts:
                    continue
                ii = slice(starts[g], ends[g])
                s = iou_matrix(boxes[ii], boxes[js]) * h.skip_decay ** (gap - 1)
                for a, b in zip(*np.nonzero((s >= h.min_iou) & (s > 0))):
                    preds[starts[f] + b].append((starts[g] + a, -math.log(s[a, b])))
        for p in preds:
            p.sort()
    return FlowGraph(dets, det_cost, h.entry_cost, h.exit_cost, preds)


@dataclass(frozen=True)
class TrackBox:
    frame: int
    box: tuple[float, float, float, float]
    score: float
    interpolated: bool = False


@dataclass
class Track:
    id: int
    boxes: list[TrackBox]
    cost: float = 0.0
    detection_indices: list[int] = field(default_factory=list)

    @property
    def first_frame(self) -> int:
        return self.boxes[0].frame


def _shortest_path(g: FlowGraph, alive: np.ndarray):
    """Best source->sink path among alive nodes; ties by (first frame, first index)."""
    n = len(g.detections)
    best: list[tuple | None] = [None] * n
    pred = [-1] * n
    for j in range(n):
        if not alive[j]:
            continue
        cand = (g.entry_cost + g.det_cost[j], g.detections[j].frame, j)
        p = -1
        for i, c in g.predecessors[j]:
            if alive[i]:
                bi = best[i]
                c2 = (bi[0] + c + g.det_cost[j], bi[1], bi[2])
                if c2 < cand:
                    cand, p = c2, i
        best[j] = cand
        pred[j] = p
    end = None
    for j in range(n):
        if best[j] is not None:
            key = (best[j][0] + g.exit_cost, best[j][1], best[j][2], j)
            if end is None or key < end:
                end = key
    if end is None:
        return math.inf, []
    path = []
    j = end[3]
    while j >= 0:
        path.append(j)
        j = pred[j]
    return end[0], path[::-1]


def interpolate_gaps(boxes: list[TrackBox]) -> list[TrackBox]:
    out = [boxes[0]]
    for a, b in zip(boxes, boxes[1:]):
        gap = b.frame - a.frame
        for k in range(1, gap):
            w = k / gap
            box = tuple((1 - w) * x + w * y for x, y in zip(a.box, b.box))
            out.append(TrackBox(a.frame + k, box, (1 - w) * a.score + w * b.score, True))
        out.append(b)
    return out


def solve_dp_mcf(g: FlowGraph, interpolate: bool = True) -> list[Track]:
    """Extract negative-cost paths one at a time, removing their nodes."""
    alive = np.ones(len(g.detections), dtype=bool)
    found = []
    while alive.any():
        cost, path = _shortest_path(g, alive)
        if not path or cost >= 0:
            break
        alive[path] = False
        boxes = [TrackBox(g.detections[i].frame, g.detections[i].box, g.detections[i].score) for i in path]
        found.append((cost, path, boxes))
    found.sort(key=lambda f: (f[2][0].frame, f[1][0]))
    return [
        Track(k + 1, interpolate_gaps(boxes) if interpolate else boxes, cost, path)
        for k, (cost, path, boxes) in enumerate(found)
    ]


def track(detections: Sequence[Detection], h: HyperParams) -> list[Track]:
    return solve_dp_mcf(build_flow_graph(detections, h))


def write_tracks(tracks: Sequence[Track], path) -> None:
    rows = sorted(
        (b.frame, t.id, b) for t in tracks for b in t.boxes
    )
    Path(path).write_text(
        "".join(
            f"{f} {tid} {b.box[0]:.6f} {b.box[1]:.6f} {b.box[2]:.6f} {b.box[3]:.6f} "
            f"{b.score:.6f} {int(b.interpolated)}\n"
            for f, tid, b in rows
        )
    )


def read_tracks(path) -> list[Track]:
    by_id: dict[int, list[TrackBox]] = {}
    for line in Path(path).read_text().splitlines():
        p = line.split()
        if p:
            box = tuple(float(v) for v in p[2:6])
            by_id.setdefault(int(p[1]), []).append(TrackBox(int(p[0]), box, float(p[6]), bool(int(p[7]))))
    return [Track(tid, sorted(bs, key=lambda b: b.frame)) for tid, bs in sorted(by_id.items())]
