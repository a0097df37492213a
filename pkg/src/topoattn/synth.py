"""Synthetic probability maps for benchmarks and batch demos."""

from __future__ import annotations

import numpy as np

from .grid import GridMap


def synthetic_probability_map(
    rng: np.random.Generator, height: int = 256, width: int = 256
) -> GridMap:
    """Mixture of smooth Gaussian blobs plus uniform noise, min-max
    normalized to [0, 1]."""
    ys = np.arange(height, dtype=np.float64)[:, None]
    xs = np.arange(width, dtype=np.float64)[None, :]
    field = np.zeros((height, width))
    for _ in range(int(rng.integers(2, 6))):
        cy = rng.uniform(0, height)
        cx = rng.uniform(0, width)
        sigma = rng.uniform(0.05, 0.25) * min(height, width)
        amp = rng.uniform(0.5, 1.0)
        field += amp * np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2.0 * sigma**2))
    field += rng.uniform(0.0, 0.15, size=(height, width))
    lo, hi = field.min(), field.max()
    if hi > lo:
        field = (field - lo) / (hi - lo)
    else:
        field = np.zeros_like(field)
    return GridMap(field)
