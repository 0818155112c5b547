"""Variation sweep over freshly generated seed scenes.

Generates ``--scenes`` procedural scenes, tracks every canonical variation
with fixed tracker settings and prints the clone row plus per-variation deltas.

    python3 scripts/run_sweep.py --scenes 3 --frames 120 --out runs/sweep
"""

import argparse
from pathlib import Path

from synthmot.config import ExperimentConfig, save_config
from synthmot.experiments import run_sweep
from synthmot.scene import generate_seed_scene, save_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--scenes", type=int, default=3)
    ap.add_argument("--objects", type=int, default=8)
    ap.add_argument("--frames", type=int, default=120)
    ap.add_argument("--style", default="urban")
    ap.add_argument("--resolution", type=int, nargs=2, default=(621, 188))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("runs/sweep"))
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    paths = []
    for k in range(args.scenes):
        path = args.out / f"seed{args.seed + k}.scene"
        save_scene(generate_seed_scene(args.seed + k, args.objects, args.frames, args.style), path)
        paths.append(str(path.resolve()))
    cfg = ExperimentConfig(scenes=tuple(paths), resolution=tuple(args.resolution), out=str(args.out.resolve()))
    cfg = cfg.with_seed(args.seed)
    result = run_sweep(cfg, args.out, args.jobs)
    save_config(cfg, args.out / "config.json", {"name": "sweep", "out": str(args.out.resolve())})
    print(result.table(), end="")


if __name__ == "__main__":
    main()
