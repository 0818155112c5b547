"""Experiment configuration shared by the CLI, sweeps and calibration.

Configs are JSON files. Every field has a default, and every run writes the
fully resolved config (defaults expanded, paths absolute) next to its outputs
so that the run can be repeated from that file alone.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .annotate import EvalFilter
from .calibrate import ParamSpace, default_param_space
from .detsim import DetectorModel
from .scene import CANONICAL_VARIATIONS, SceneDescription, VariationSpec, load_scene
from .track import HyperParams


class ConfigError(ValueError):
    pass


def _default_variations() -> tuple[VariationSpec, ...]:
    return tuple(VariationSpec(k) for k in ("clone", *CANONICAL_VARIATIONS))


@dataclass(frozen=True)
class ExperimentConfig:
    scenes: tuple[str, ...] = ()
    out: str = "out"
    variations: tuple[VariationSpec, ...] = field(default_factory=_default_variations)
    detector: DetectorModel = DetectorModel()
    hyperparams: HyperParams = HyperParams()
    param_space: ParamSpace = field(default_factory=default_param_space)
    eval_filter: EvalFilter = EvalFilter()
    # optimizer seed; the detector carries its own seed
    seed: int = 0
    budget: int = 40
    strategy: str = "smbo"
    mode: str = "per_pair"
    pairs: tuple[tuple[str, str], ...] = (("clone", "fog"),)
    iou_threshold: float = 0.5
    # render resolution override as (width, height); intrinsics are rescaled
    resolution: tuple[int, int] | None = None

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigError("budget: must be >= 1")
        if self.strategy not in ("random", "smbo"):
            raise ConfigError(f"strategy: unknown {self.strategy!r}")
        if self.mode not in ("per_pair", "global"):
            raise ConfigError(f"mode: unknown {self.mode!r}")
        if not 0.0 < self.iou_threshold <= 1.0:
            raise ConfigError("iou_threshold: must lie in (0, 1]")
        names = [v.name for v in self.variations]
        if len(set(names)) != len(names):
            raise ConfigError("variations: names must be unique")
        if self.resolution is not None and (len(self.resolution) != 2 or min(self.resolution) < 16):
            raise ConfigError("resolution: expected [width, height] with both >= 16")

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """``--seed`` sets both the optimizer and the detector stream."""
        return dataclasses.replace(
            self, seed=seed, detector=dataclasses.replace(self.detector, seed=seed)
        )

    def load_scenes(self) -> list[tuple[str, SceneDescription]]:
        return [(scene_name(p), self.prepare_scene(load_scene(p))) for p in self.scenes]

    def prepare_scene(self, scene: SceneDescription) -> SceneDescription:
        if self.resolution is None:
            return scene
        w, h = self.resolution
        return dataclasses.replace(scene, intrinsics=scene.intrinsics.resized(int(w), int(h)))

    def to_dict(self) -> dict:
        return {
            "scenes": list(self.scenes),
            "out": self.out,
            "variations": [v.to_dict() for v in self.variations],
            "detector": self.detector.to_dict(),
            "hyperparams": self.hyperparams.to_dict(),
            "param_space": self.param_space.to_list(),
            "eval_filter": self.eval_filter.to_dict(),
            "seed": self.seed,
            "budget": self.budget,
            "strategy": self.strategy,
            "mode": self.mode,
            "pairs": [list(p) for p in self.pairs],
            "iou_threshold": self.iou_threshold,
            "resolution": list(self.resolution) if self.resolution else None,
        }

    @classmethod
    def from_dict(cls, d: Mapping[str, Any], base_dir: Path | None = None) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - known - {"command"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kw: dict[str, Any] = {}
        try:
            if "scenes" in d:
                kw["scenes"] = tuple(_resolve(p, base_dir) for p in d["scenes"])
            if "out" in d:
                kw["out"] = str(d["out"])
            if "variations" in d:
                kw["variations"] = tuple(VariationSpec.parse(v) for v in d["variations"])
            if "detector" in d:
                kw["detector"] = DetectorModel.from_dict(d["detector"])
            if "hyperparams" in d:
                kw["hyperparams"] = HyperParams.from_dict(d["hyperparams"])
            if "param_space" in d:
                kw["param_space"] = ParamSpace.from_list(d["param_space"])
            if "eval_filter" in d:
                kw["eval_filter"] = EvalFilter.from_dict(d["eval_filter"])
            for k in ("seed", "budget"):
                if k in d:
                    kw[k] = int(d[k])
            for k in ("strategy", "mode"):
                if k in d:
                    kw[k] = str(d[k])
            if "pairs" in d:
                kw["pairs"] = tuple((str(a), str(b)) for a, b in d["pairs"])
            if "iou_threshold" in d:
                kw["iou_threshold"] = float(d["iou_threshold"])
            if d.get("resolution") is not None:
                kw["resolution"] = tuple(int(x) for x in d["resolution"])
        except (KeyError, TypeError) as e:
            raise ConfigError(f"malformed config: {e!r}") from e
        cfg = cls(**kw)
        for p in cfg.scenes:
            if not Path(p).is_file():
                raise ConfigError(f"scenes: file not found: {p}")
        return cfg


def _resolve(p: str, base_dir: Path | None) -> str:
    path = Path(p)
    if not path.is_absolute() and base_dir is not None:
        path = base_dir / path
    return str(path.resolve())


def scene_name(path) -> str:
    return Path(path).stem


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        d = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: top level must be an object")
    return ExperimentConfig.from_dict(d, path.parent)


def dump_config(cfg: ExperimentConfig, command: Mapping[str, Any] | None = None) -> str:
    d = cfg.to_dict()
    if command is not None:
        d["command"] = dict(command)
    return json.dumps(d, indent=1, sort_keys=True) + "\n"


def save_config(cfg: ExperimentConfig, path, command: Mapping[str, Any] | None = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dump_config(cfg, command), encoding="utf-8")
