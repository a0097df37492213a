"""Turn persistence diagrams into per-pixel attention weights.

Pipeline: keep features whose lifespan clears a percentile threshold,
write each retained feature's persistence onto the pixels matching its
birth level, then squash scores through a sigmoid.  The essential
component has no death, so its lifespan is capped at the filtration
bound l_max.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

from .cubical import PersistenceDiagram, PersistencePair, build_filtration, compute_persistence
from .errors import ValidationError
from .grid import GridMap, LevelMap, quantize


@dataclass(frozen=True)
class AttnConfig:
    """Knobs for the attention pipeline.

    percentile: lifespan percentile below which features are dropped.
    birth_tolerance: levels a pixel may differ from a birth value and
        still count as a birth location.
    scale: divisor applied to scores before the sigmoid ("literal" mode
        at 1.0).
    normalize: divide scores by the image's max persistence first.
    per_dim_percentile: threshold each homology dimension separately
        instead of pooling lifespans.
    """

    percentile: float = 50.0
    birth_tolerance: int = 0
    scale: float = 1.0
    normalize: bool = False
    per_dim_percentile: bool = False

    def __post_init__(self):
        if not 0.0 <= self.percentile <= 100.0:
            raise ValidationError(f"percentile must be in [0, 100], got {self.percentile}")
        if self.birth_tolerance < 0:
            raise ValidationError(f"birth_tolerance must be >= 0, got {self.birth_tolerance}")
        if not self.scale > 0.0:
            raise ValidationError(f"scale must be > 0, got {self.scale}")


@dataclass(frozen=True)
class PersistenceScoreMap:
    """Persistence values at birth locations, zero elsewhere."""

    scores: np.ndarray

    def __post_init__(self):
        arr = np.array(self.scores, dtype=np.float64, order="C")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"score map dims must be >= 1, got shape {arr.shape}")
        if not np.isfinite(arr).all() or arr.min() < 0.0:
            raise ValidationError("scores must be finite and >= 0")
        arr.flags.writeable = False
        object.__setattr__(self, "scores", arr)

    @property
    def height(self) -> int:
        return self.scores.shape[0]

    @property
    def width(self) -> int:
        return self.scores.shape[1]


@dataclass(frozen=True)
class AttentionMap:
    """Per-pixel weights in [0, 1], same extent as the source grid."""

    weights: np.ndarray

    def __post_init__(self):
        arr = np.array(self.weights, dtype=np.float32, order="C")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"attention map dims must be >= 1, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("attention weights must be finite")
        if arr.min() < 0.0 or arr.max() > 1.0:
            raise ValidationError("attention weights must lie in [0, 1]")
        arr.flags.writeable = False
        object.__setattr__(self, "weights", arr)

    @property
    def height(self) -> int:
        return self.weights.shape[0]

    @property
    def width(self) -> int:
        return self.weights.shape[1]


def lifespan(pair: PersistencePair, l_max: int) -> int:
    """death - birth, with the essential death capped at l_max."""
    death = l_max if math.isinf(pair.death) else int(pair.death)
    return death - pair.birth


def _nearest_rank(sorted_values: list[int], percentile: float) -> int:
    # 1-based rank ceil(p/100 * n), clamped to [1, n].
    n = len(sorted_values)
    rank = max(1, math.ceil(percentile / 100.0 * n))
    return sorted_values[min(rank, n) - 1]


def filter_significant(
    pd: PersistenceDiagram, percentile: float = 50.0, per_dimension: bool = False
) -> PersistenceDiagram:
    """Retain pairs whose lifespan reaches the nearest-rank percentile."""
    if not 0.0 <= percentile <= 100.0:
        raise ValidationError(f"percentile must be in [0, 100], got {percentile}")
    if not pd.pairs:
        return pd
    if per_dimension:
        retained = []
        for dim in (0, 1):
            pairs = pd.select(dim)
            if not pairs:
                continue
            tau = _nearest_rank(sorted(lifespan(p, pd.l_max) for p in pairs), percentile)
            retained.extend(p for p in pairs if lifespan(p, pd.l_max) >= tau)
        retained.sort(key=lambda p: (p.dim, p.birth, p.death))
    else:
        tau = _nearest_rank(sorted(lifespan(p, pd.l_max) for p in pd.pairs), percentile)
        retained = [p for p in pd.pairs if lifespan(p, pd.l_max) >= tau]
    return PersistenceDiagram(tuple(retained), pd.l_max)


def score_map(
    levels: LevelMap, retained: PersistenceDiagram, birth_tolerance: int = 0
) -> PersistenceScoreMap:
    """Write each retained persistence onto pixels near its birth level.

    A pixel within birth_tolerance levels of several retained births
    takes the maximum persistence among them.
    """
    if birth_tolerance < 0:
        raise ValidationError(f"birth_tolerance must be >= 0, got {birth_tolerance}")
    if levels.l_max != retained.l_max:
        raise ValidationError(
            f"level scale {levels.l_max} does not match diagram scale {retained.l_max}"
        )
    per_level = np.zeros(levels.l_max + 1, dtype=np.float64)
    for pair in retained.pairs:
        value = float(lifespan(pair, retained.l_max))
        if value > per_level[pair.birth]:
            per_level[pair.birth] = value
    if birth_tolerance > 0:
        per_level = maximum_filter1d(
            per_level, size=2 * birth_tolerance + 1, mode="constant", cval=0.0
        )
    return PersistenceScoreMap(per_level[levels.levels])


def to_attention(scores: PersistenceScoreMap, config: AttnConfig = AttnConfig()) -> AttentionMap:
    """weight = sigmoid(s / scale), s pre-divided by max when normalizing."""
    s = scores.scores
    if config.normalize:
        top = s.max()
        s = s / top if top > 0.0 else np.zeros_like(s)
    weights = 1.0 / (1.0 + np.exp(-s / config.scale))
    return AttentionMap(weights)


def generate_attention_map(
    prob: GridMap, config: AttnConfig = AttnConfig(), l_max: int = 255
) -> AttentionMap:
    """Full pipeline from a probability map to an attention map."""
    levels = quantize(prob, l_max)
    pd = compute_persistence(build_filtration(levels))
    retained = filter_significant(pd, config.percentile, config.per_dim_percentile)
    scores = score_map(levels, retained, config.birth_tolerance)
    return to_attention(scores, config)
