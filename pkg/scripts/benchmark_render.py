"""Render throughput of the four-pass pipeline at a few resolutions.

    python3 scripts/benchmark_render.py --objects 10 --frames 40
"""

import argparse
import dataclasses
import tempfile
import time

from synthmot.pipeline import render_to_disk
from synthmot.render import render_frame
from synthmot.scene import CameraIntrinsics, generate_seed_scene


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--objects", type=int, default=10)
    ap.add_argument("--frames", type=int, default=40)
    ap.add_argument("--seed", type=int, default=11)
    ap.add_argument("--style", default="urban")
    ap.add_argument("--sizes", nargs="+", default=["621x188", "1242x375"])
    args = ap.parse_args()

    base = generate_seed_scene(args.seed, args.objects, args.frames, args.style)
    print(f"{args.objects} objects, {args.frames} frames, {len(base.static_props)} props")
    for size in args.sizes:
        w, h = (int(v) for v in size.split("x"))
        scene = dataclasses.replace(base, intrinsics=CameraIntrinsics().resized(w, h))
        t0 = time.perf_counter()
        for t in range(scene.frame_count):
            render_frame(scene, t)
        raster = scene.frame_count / (time.perf_counter() - t0)
        with tempfile.TemporaryDirectory() as tmp:
            _, stats = render_to_disk(scene, tmp)
        print(f"{w}x{h}: buffers only {raster:6.2f} FPS, with ground truth and files {stats.fps:6.2f} FPS")


if __name__ == "__main__":
    main()
