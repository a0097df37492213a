"""In-process binding for training pipelines.

Exposes exactly two functions over contiguous row-major float32 buffers
plus a version string.  Results are bit-identical to the command-line
pipeline on the same data and flags; quantization to 256 levels happens
inside, so callers hand over raw probabilities in [0, 1].

Inputs already laid out as C-contiguous float32 are consumed without a
copy; anything else is converted through one explicit copy.  There is no
global mutable state and the heavy kernels release the interpreter lock,
so concurrent calls from multiple threads are safe.

Raises ``ValidationError`` (mirroring the CLI's exit-1 class) on bad
input; I/O errors cannot occur in-process.
"""

from __future__ import annotations

import math

import numpy as np

import topoattn
from topoattn import AttnConfig, GridMap, ValidationError

__version__ = topoattn.__version__

__all__ = ["ValidationError", "__version__", "compute_persistence", "generate_attention_map"]


def _ingest(array) -> GridMap:
    arr = np.asarray(array)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-D array, got ndim={arr.ndim}")
    if arr.dtype != np.float32 or not arr.flags.c_contiguous:
        arr = np.ascontiguousarray(arr, dtype=np.float32)  # the one explicit copy
    if not np.isfinite(arr).all():
        raise ValidationError("array contains non-finite values")
    if arr.size and (float(arr.min()) < 0.0 or float(arr.max()) > 1.0):
        raise ValidationError("value outside [0, 1]")
    return GridMap(arr)


def generate_attention_map(
    array,
    percentile: float = 50.0,
    tolerance: int = 0,
    scale: float = 1.0,
    normalize: bool = False,
) -> np.ndarray:
    """Attention weights for a probability array, as float32 (H, W)."""
    config = AttnConfig(
        percentile=percentile, birth_tolerance=tolerance, scale=scale, normalize=normalize
    )
    return topoattn.generate_attention_map(_ingest(array), config).weights.copy()


def compute_persistence(array) -> list[tuple[int, int, float]]:
    """(dim, birth, death) triples of the quantized array's diagram;
    death is ``math.inf`` for the essential component."""
    levels = topoattn.quantize(_ingest(array), 255)
    pd = topoattn.compute_persistence(topoattn.build_filtration(levels))
    return [(p.dim, p.birth, math.inf if math.isinf(p.death) else int(p.death)) for p in pd.pairs]
