"""Gap-protocol calibration of the tracker on generated clone/variation pairs.

    python3 scripts/run_calibration.py --pairs clone:fog clone:rain --budget 40
"""

import argparse
from pathlib import Path

from synthmot.config import ExperimentConfig, save_config
from synthmot.experiments import run_calibration
from synthmot.scene import VariationSpec, generate_seed_scene, save_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", nargs="+", default=["clone:fog"], help="A:B variation pairs")
    ap.add_argument("--mode", choices=("per_pair", "global"), default="per_pair")
    ap.add_argument("--strategy", choices=("smbo", "random"), default="smbo")
    ap.add_argument("--budget", type=int, default=40)
    ap.add_argument("--objects", type=int, default=10)
    ap.add_argument("--frames", type=int, default=120)
    ap.add_argument("--scene-seed", type=int, default=7)
    ap.add_argument("--resolution", type=int, nargs=2, default=(621, 188))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/calibration"))
    args = ap.parse_args()

    pairs = tuple(tuple(p.split(":")) for p in args.pairs)
    names = sorted({v for p in pairs for v in p})
    args.out.mkdir(parents=True, exist_ok=True)
    scene_path = args.out / f"seed{args.scene_seed}.scene"
    save_scene(generate_seed_scene(args.scene_seed, args.objects, args.frames, "urban"), scene_path)
    cfg = ExperimentConfig(
        scenes=(str(scene_path.resolve()),), variations=tuple(VariationSpec(v) for v in names),
        pairs=pairs, mode=args.mode, strategy=args.strategy, budget=args.budget,
        resolution=tuple(args.resolution), out=str(args.out.resolve()),
    ).with_seed(args.seed)
    report = run_calibration(cfg, args.out, args.jobs)
    save_config(cfg, args.out / "config.json", {"name": "calibrate", "out": str(args.out.resolve())})
    print(report.table(), end="")
    print(f"objective {report.objective:.6g}")


if __name__ == "__main__":
    main()
