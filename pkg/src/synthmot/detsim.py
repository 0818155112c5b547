"""Seeded detector simulator driven by ground-truth difficulty.

Every random draw comes from a stream keyed by ``(seed, frame, role, key)``
where ``key`` is the ground-truth track id (or the false-positive slot), so
changing one box's conditions never reshuffles another box's draws.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .annotate import GtBox2D
from .scene import CameraIntrinsics

ROLE_MISS, ROLE_JITTER, ROLE_SCORE, ROLE_FP = 1, 2, 3, 4
JITTER_CLIP = 3.0  # jitter is a Gaussian truncated at this many sigmas


@dataclass(frozen=True)
class Detection:
    frame: int
    left: float
    top: float
    right: float
    bottom: float
    score: float

    @property
    def box(self) -> tuple[float, float, float, float]:
        return (self.left, self.top, self.right, self.bottom)


@dataclass(frozen=True)
class DetectorModel:
    miss_base: float = 0.02
    occlusion_weight: float = 0.6
    truncation_weight: float = 0.4
    fog_weight: float = 0.8
    size_scale: float = 40.0
    jitter_sigma: float = 0.03
    fp_rate: float = 0.2
    score_noise_sigma: float = 0.08
    seed: int = 0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            if f.name != "seed" and getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")
        if self.size_scale <= 0:
            raise ValueError("size_scale must be positive")

    def miss_probability(self, gt: GtBox2D) -> float:
        p = (
            self.miss_base
            + self.occlusion_weight * (1.0 - gt.occupancy)
            + self.truncation_weight * gt.truncation
            + self.fog_weight * (1.0 - gt.visibility)
            + max(0.0, 1.0 - gt.height / self.size_scale)
        )
        return min(1.0, max(0.0, p))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d) -> "DetectorModel":
        return cls(**(d or {}))


def _stream(seed: int, frame: int, role: int, key: int = 0) -> np.random.Generator:
    s = seed & 0xFFFFFFFFFFFFFFFF
    return np.random.default_rng([s & 0xFFFFFFFF, s >> 32, frame, role, key])


def _clip_box(box, intr: CameraIntrinsics):
    left, top, right, bottom = box
    left, right = max(left, 0.0), min(right, float(intr.width))
    top, bottom = max(top, 0.0), min(bottom, float(intr.height))
    if right - left <= 0 or bottom - top <= 0:
        return None
    return left, top, right, bottom


def _true_positive(gt: GtBox2D, model: DetectorModel, intr: CameraIntrinsics) -> Detection | None:
    u = _stream(model.seed, gt.frame, ROLE_MISS, gt.track_id).random()
    if u < model.miss_probability(gt):
        return None
    w, h = gt.right - gt.left, gt.bottom - gt.top
    noise = _stream(model.seed, gt.frame, ROLE_JITTER, gt.track_id).standard_normal(4)
    noise = np.clip(noise, -JITTER_CLIP, JITTER_CLIP) * model.jitter_sigma
    box = (gt.left + noise[0] * w, gt.top + noise[1] * h, gt.right + noise[2] * w, gt.bottom + noise[3] * h)
    box = _clip_box(box, intr)
    if box is None:
        return None
    e = _stream(model.seed, gt.frame, ROLE_SCORE, gt.track_id).standard_normal()
    score = 0.5 + 0.5 * gt.occupancy * gt.visibility - abs(e * model.score_noise_sigma)
    return Detection(gt.frame, *box, float(min(1.0, max(0.0, score))))


def _false_positives(frame: int, model: DetectorModel, intr: CameraIntrinsics) -> list[Detection]:
    if model.fp_rate == 0:
        return []
    rng = _stream(model.seed, frame, ROLE_FP)
    out = []
    for _ in range(rng.poisson(model.fp_rate)):
        h = float(np.exp(rng.uniform(np.log(15.0), np.log(150.0))))
        aspect = max(0.3, rng.normal(1.6, 0.3))
        w = h * aspect
        x = rng.uniform(0, intr.width - min(w, intr.width - 1))
        y = rng.uniform(0, intr.height - min(h, intr.height - 1))
        score = float(rng.beta(2, 5))
        box = _clip_box((x, y, x + w, y + h), intr)
        if box is not None:
            out.append(Detection(frame, *box, score))
    return out


def simulate_detections(
    gt: Sequence[GtBox2D], model: DetectorModel, intr: CameraIntrinsics, frames: Iterable[int] | None = None
) -> list[Detection]:
    """Detections for every frame in ``frames`` (default: frames present in ``gt``).

    Sorted by frame, then by descending score.
    """
    by_frame: dict[int, list[GtBox2D]] = {}
    for g in gt:
        by_frame.setdefault(g.frame, []).append(g)
    frames = sorted(set(frames) if frames is not None else by_frame)
    out = []
    for f in frames:
        dets = [d for g in by_frame.get(f, []) if (d := _true_positive(g, model, intr)) is not None]
        dets += _false_positives(f, model, intr)
        dets.sort(key=lambda d: (-d.score, d.left, d.top))
        out.extend(dets)
    return out


def write_detections(dets: Sequence[Detection], path) -> None:
    Path(path).write_text(
        "".join(
            f"{d.frame} {d.left:.6f} {d.top:.6f} {d.right:.6f} {d.bottom:.6f} {d.score:.6f}\n"
            for d in dets
        )
    )


def read_detections(path) -> list[Detection]:
    out = []
    for line in Path(path).read_text().splitlines():
        p = line.split()
        if p:
            out.append(Detection(int(p[0]), *(float(v) for v in p[1:6])))
    return out
