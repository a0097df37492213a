import math
import subprocess
import sys

import numpy as np
import pytest

from topoattn import LevelMap, build_filtration, compute_persistence


def ring_levels() -> np.ndarray:
    """3x3 grid, border pixels level 1, center level 9 (one loop)."""
    g = np.full((3, 3), 1, dtype=np.int64)
    g[1, 1] = 9
    return g


def two_component_levels() -> np.ndarray:
    """3x3 background 7 with early pixels at (0,0)=2 and (2,2)=3."""
    g = np.full((3, 3), 7, dtype=np.int64)
    g[0, 0] = 2
    g[2, 2] = 3
    return g


def pairs_multiset(pd):
    return sorted((p.dim, p.birth, p.death) for p in pd.pairs)


def diagram_of(levels: np.ndarray, l_max: int):
    return compute_persistence(build_filtration(LevelMap(levels, l_max)))


def run_cli(*args, cwd=None):
    return subprocess.run(
        [sys.executable, "-m", "topoattn", *map(str, args)],
        capture_output=True,
        text=True,
        cwd=cwd,
    )


INF = math.inf


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
