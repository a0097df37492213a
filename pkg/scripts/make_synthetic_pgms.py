#!/usr/bin/env python3
"""Write a directory of synthetic probability maps as PGM files, for
exercising the batch CLI and eyeballing attention output."""

import argparse
import os

import numpy as np

from topoattn import quantize, save_pgm, synthetic_probability_map


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("output_dir")
    ap.add_argument("--images", type=int, default=20)
    ap.add_argument("--size", type=int, default=256)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    os.makedirs(args.output_dir, exist_ok=True)
    for i in range(args.images):
        grid = synthetic_probability_map(rng, args.size, args.size)
        save_pgm(quantize(grid), os.path.join(args.output_dir, f"map_{i:04d}.pgm"))
    print(f"wrote {args.images} PGMs to {args.output_dir}")


if __name__ == "__main__":
    main()
