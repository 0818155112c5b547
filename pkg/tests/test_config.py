import dataclasses
import json

import pytest

from synthmot.calibrate import default_param_space
from synthmot.config import ConfigError, ExperimentConfig, dump_config, load_config, save_config
from synthmot.scene import CANONICAL_VARIATIONS, VariationSpec


def test_defaults():
    cfg = ExperimentConfig()
    assert [v.name for v in cfg.variations] == ["clone", *CANONICAL_VARIATIONS]
    assert cfg.pairs == (("clone", "fog"),)
    assert cfg.param_space == default_param_space()
    assert cfg.mode == "per_pair" and cfg.budget == 40


def test_round_trip(tmp_path, fixture_scene_path):
    cfg = ExperimentConfig(scenes=(str(fixture_scene_path),), seed=4, budget=12, resolution=(320, 96),
                           variations=(VariationSpec("fog", {"fog_beta": 0.05}),))
    save_config(cfg, tmp_path / "c.json", {"name": "sweep", "out": "x"})
    back = load_config(tmp_path / "c.json")
    assert back == cfg
    # defaults are written out in full
    d = json.loads((tmp_path / "c.json").read_text())
    assert {"detector", "hyperparams", "param_space", "eval_filter", "command"} <= set(d)
    assert dump_config(back, {"name": "sweep", "out": "x"}) == (tmp_path / "c.json").read_text()


def test_with_seed_sets_detector_seed():
    cfg = ExperimentConfig().with_seed(9)
    assert cfg.seed == 9 and cfg.detector.seed == 9


def test_relative_scene_paths_resolve_against_config(tmp_path, fixture_scene_path):
    (tmp_path / "sub").mkdir()
    (tmp_path / "sub" / "a.scene").write_bytes(fixture_scene_path.read_bytes())
    (tmp_path / "sub" / "c.json").write_text(json.dumps({"scenes": ["a.scene"]}))
    cfg = load_config(tmp_path / "sub" / "c.json")
    assert cfg.scenes == (str((tmp_path / "sub" / "a.scene").resolve()),)
    assert cfg.load_scenes()[0][0] == "a"


def test_missing_scene_is_an_error(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"scenes": ["nope.scene"]}))
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "c.json")


def test_unknown_key_and_parse_errors(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"sceens": []}))
    with pytest.raises(ConfigError, match="sceens"):
        load_config(tmp_path / "c.json")
    (tmp_path / "d.json").write_text('{\n  "seed": 1,\n  oops\n}')
    with pytest.raises(ConfigError, match=r"d.json:3:"):
        load_config(tmp_path / "d.json")
    (tmp_path / "e.json").write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(tmp_path / "e.json")


@pytest.mark.parametrize("bad", [{"budget": 0}, {"strategy": "grid"}, {"mode": "both"},
                                 {"iou_threshold": 0.0}, {"resolution": (8, 8)}])
def test_validation(bad):
    with pytest.raises(ConfigError):
        ExperimentConfig(**bad)


def test_duplicate_variations_rejected():
    with pytest.raises(ConfigError):
        ExperimentConfig(variations=(VariationSpec("fog"), VariationSpec("fog")))


def test_resolution_rescales_intrinsics(fixture_scene_path):
    cfg = ExperimentConfig(scenes=(str(fixture_scene_path),), resolution=(621, 188))
    (_, scene), = cfg.load_scenes()
    small = cfg.prepare_scene(scene)
    assert (small.intrinsics.width, small.intrinsics.height) == (621, 188)
    assert small.intrinsics.fx == pytest.approx(scene.intrinsics.fx * 621 / scene.intrinsics.width)
    assert dataclasses.replace(small, intrinsics=scene.intrinsics) == scene
