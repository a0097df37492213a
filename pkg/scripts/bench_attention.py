#!/usr/bin/env python3
"""Measure end-to-end attention-map latency on synthetic maps.

Generates blob+noise probability maps, runs the full pipeline
single-threaded, and reports per-image timing against the 130 ms
desktop budget (1450 images in under ~190 s).
"""

import argparse
import time

import numpy as np

from topoattn import AttnConfig, generate_attention_map, synthetic_probability_map

TARGET_MS = 130.0


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--images", type=int, default=100)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--percentile", type=float, default=50.0)
    ap.add_argument("--scale", type=float, default=1.0)
    ap.add_argument("--normalize", action="store_true")
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    config = AttnConfig(percentile=args.percentile, scale=args.scale, normalize=args.normalize)
    maps = [synthetic_probability_map(rng, args.size, args.size) for _ in range(args.images)]

    generate_attention_map(maps[0], config)  # warm the jit cache
    times = []
    for grid in maps:
        start = time.perf_counter()
        generate_attention_map(grid, config)
        times.append((time.perf_counter() - start) * 1000.0)

    times = np.array(times)
    mean = times.mean()
    print(f"images: {args.images}  size: {args.size}x{args.size}")
    print(f"mean:   {mean:8.3f} ms/image")
    print(f"median: {np.median(times):8.3f} ms/image")
    print(f"p95:    {np.percentile(times, 95):8.3f} ms/image")
    print(f"total:  {times.sum() / 1000.0:8.3f} s")
    status = "within" if mean <= TARGET_MS else "OVER"
    print(f"{status} the {TARGET_MS:.0f} ms/image budget "
          f"(projects to {mean * 1450 / 1000.0:.1f} s for 1450 images)")


if __name__ == "__main__":
    main()
