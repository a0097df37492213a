"""Multi-scale feature fusion with attention injection.

Dataflow per scale: an external attention hook (identity by default), a
1x1 channel reduction, a Hadamard product with the resized attention
map, cross-scale resolution alignment (adaptive average pooling down,
bilinear up, identity at equal dims, each followed by an optional 3x3
convolution), and finally the elementwise product of the four aligned
tensors.  All learned weights are caller-supplied; defaults are exact
identities so the dataflow can be verified numerically.

Feature tensors are float64 arrays of shape (H, W, C).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .attention import AttentionMap
from .errors import ValidationError

FeatureTensor = np.ndarray


def _as_feature(x, what: str = "feature tensor") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValidationError(f"{what} must be (H, W, C) with dims >= 1, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValidationError(f"{what} contains non-finite values")
    return arr


@dataclass(frozen=True)
class ScalePyramid:
    """Feature tensors at successively coarser scales (strictly
    decreasing H and W)."""

    features: tuple[FeatureTensor, ...]

    def __post_init__(self):
        feats = tuple(_as_feature(f, f"pyramid scale {i}") for i, f in enumerate(self.features))
        if len(feats) < 1:
            raise ValidationError("pyramid needs at least one scale")
        for a, b in zip(feats, feats[1:]):
            if not (a.shape[0] > b.shape[0] and a.shape[1] > b.shape[1]):
                raise ValidationError(
                    f"pyramid dims must strictly decrease, got {a.shape} then {b.shape}"
                )
        object.__setattr__(self, "features", feats)

    @property
    def num_scales(self) -> int:
        return len(self.features)


def cbam_stub(f0: FeatureTensor, hook: Callable | None = None) -> FeatureTensor:
    """Identity placeholder for a learned attention module; an external
    hook may transform the tensor but must preserve its dims."""
    f0 = _as_feature(f0)
    if hook is None:
        return f0
    out = _as_feature(hook(f0), "hook output")
    if out.shape != f0.shape:
        raise ValidationError(f"hook changed dims {f0.shape} -> {out.shape}")
    return out


def channel_reduce(f1: FeatureTensor, weights) -> FeatureTensor:
    """1x1 convolution: per-pixel linear map over channels."""
    f1 = _as_feature(f1)
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[1] != f1.shape[2]:
        raise ValidationError(
            f"weights must be (c_out, c_in={f1.shape[2]}), got shape {w.shape}"
        )
    return np.einsum("hwc,oc->hwo", f1, w)


def _bilinear(arr: np.ndarray, height: int, width: int) -> np.ndarray:
    # Half-pixel centers (align_corners=False), edges clamped.
    src_h, src_w = arr.shape[:2]
    ys = np.clip((np.arange(height) + 0.5) * (src_h / height) - 0.5, 0.0, src_h - 1.0)
    xs = np.clip((np.arange(width) + 0.5) * (src_w / width) - 0.5, 0.0, src_w - 1.0)
    y0 = np.floor(ys).astype(np.int64)
    x0 = np.floor(xs).astype(np.int64)
    y1 = np.minimum(y0 + 1, src_h - 1)
    x1 = np.minimum(x0 + 1, src_w - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    tl = arr[np.ix_(y0, x0)]
    tr = arr[np.ix_(y0, x1)]
    bl = arr[np.ix_(y1, x0)]
    br = arr[np.ix_(y1, x1)]
    top = tl + fx * (tr - tl)
    bot = bl + fx * (br - bl)
    return top + fy * (bot - top)


def _adaptive_avg_pool(arr: np.ndarray, height: int, width: int) -> np.ndarray:
    # Output cell (a, b) averages rows [a*H//H_out, ceil((a+1)*H/H_out)),
    # same for columns; windows may overlap when dims do not divide.
    src_h, src_w = arr.shape[:2]
    r0 = (np.arange(height) * src_h) // height
    r1 = -((-(np.arange(height) + 1) * src_h) // height)
    c0 = (np.arange(width) * src_w) // width
    c1 = -((-(np.arange(width) + 1) * src_w) // width)
    out = np.empty((height, width, arr.shape[2]))
    for a in range(height):
        for b in range(width):
            out[a, b] = arr[r0[a] : r1[a], c0[b] : c1[b]].mean(axis=(0, 1))
    return out


def resize_attention(attn: AttentionMap, height: int, width: int) -> AttentionMap:
    """Bilinear resize of an attention map; output stays in [0, 1]."""
    if height < 1 or width < 1:
        raise ValidationError(f"target dims must be >= 1, got {height}x{width}")
    if (height, width) == (attn.height, attn.width):
        return attn
    resized = _bilinear(attn.weights.astype(np.float64)[:, :, None], height, width)[:, :, 0]
    return AttentionMap(np.clip(resized, 0.0, 1.0))


def hadamard_inject(f2: FeatureTensor, attn: AttentionMap) -> FeatureTensor:
    """Multiply features by the attention map, broadcast over channels."""
    f2 = _as_feature(f2)
    if (f2.shape[0], f2.shape[1]) != (attn.height, attn.width):
        raise ValidationError(
            f"spatial mismatch: features {f2.shape[:2]} vs attention "
            f"{(attn.height, attn.width)}"
        )
    return f2 * attn.weights.astype(np.float64)[:, :, None]


def _conv3x3_same(arr: np.ndarray, weights: np.ndarray) -> np.ndarray:
    h, w, _ = arr.shape
    padded = np.pad(arr, ((1, 1), (1, 1), (0, 0)))
    out = np.zeros((h, w, weights.shape[0]))
    for dy in range(3):
        for dx in range(3):
            out += np.einsum("hwc,oc->hwo", padded[dy : dy + h, dx : dx + w], weights[:, :, dy, dx])
    return out


def rescale_feature(
    f3_j: FeatureTensor, height: int, width: int, conv_weights=None
) -> FeatureTensor:
    """Align a tensor to the target resolution, then 3x3 convolve.

    Smaller target: adaptive average pooling; equal: identity; larger:
    bilinear interpolation.  conv_weights has shape (c_out, c_in, 3, 3);
    None skips the convolution (the identity kernel).
    """
    f3_j = _as_feature(f3_j)
    if height < 1 or width < 1:
        raise ValidationError(f"target dims must be >= 1, got {height}x{width}")
    src_h, src_w = f3_j.shape[:2]
    if (height, width) == (src_h, src_w):
        out = f3_j
    elif height <= src_h and width <= src_w:
        out = _adaptive_avg_pool(f3_j, height, width)
    elif height >= src_h and width >= src_w:
        out = _bilinear(f3_j, height, width)
    else:
        raise ValidationError(
            f"mixed up/down resize {f3_j.shape[:2]} -> {(height, width)} is not supported"
        )
    if conv_weights is None:
        return out
    w = np.asarray(conv_weights, dtype=np.float64)
    if w.ndim != 4 or w.shape[1] != out.shape[2] or w.shape[2:] != (3, 3):
        raise ValidationError(
            f"conv weights must be (c_out, c_in={out.shape[2]}, 3, 3), got shape {w.shape}"
        )
    return _conv3x3_same(out, w)


def fuse(parts: Sequence[FeatureTensor]) -> FeatureTensor:
    """Elementwise product of same-shaped tensors."""
    arrs = [_as_feature(p, f"fuse input {i}") for i, p in enumerate(parts)]
    if len(arrs) < 1:
        raise ValidationError("fuse needs at least one tensor")
    shape = arrs[0].shape
    for i, arr in enumerate(arrs[1:], start=1):
        if arr.shape != shape:
            raise ValidationError(f"fuse input {i} has shape {arr.shape}, expected {shape}")
    out = arrs[0]
    for arr in arrs[1:]:
        out = out * arr
    return out


def _per_scale(arg, num_scales: int, what: str):
    if arg is None:
        return [None] * num_scales
    if isinstance(arg, np.ndarray):
        return [arg] * num_scales
    seq = list(arg)
    if len(seq) != num_scales:
        raise ValidationError(f"{what} must have one entry per scale, got {len(seq)}")
    return seq


def sdi_fuse(
    pyramid: ScalePyramid,
    attention: AttentionMap | None = None,
    reduce_weights=None,
    conv_weights=None,
    cbam_hook: Callable | None = None,
) -> tuple[FeatureTensor, ...]:
    """Fuse every pyramid scale with all the others.

    Per scale: attention hook, optional channel reduction, Hadamard
    injection of the resized attention map (skipped when attention is
    None), then for each target scale align all scales to it and take
    their elementwise product.  Output i has the dims of pyramid scale i.
    """
    m = pyramid.num_scales
    reduce_per = _per_scale(reduce_weights, m, "reduce_weights")
    conv_per = _per_scale(conv_weights, m, "conv_weights")

    refined = []
    for i, f0 in enumerate(pyramid.features):
        f1 = cbam_stub(f0, cbam_hook)
        f2 = channel_reduce(f1, reduce_per[i]) if reduce_per[i] is not None else f1
        refined.append(f2)
    channels = {f.shape[2] for f in refined}
    if len(channels) != 1:
        raise ValidationError(f"scales disagree on channel count after reduction: {channels}")

    if attention is not None:
        refined = [
            hadamard_inject(f2, resize_attention(attention, f2.shape[0], f2.shape[1]))
            for f2 in refined
        ]

    outputs = []
    for i, target in enumerate(pyramid.features):
        h, w = target.shape[0], target.shape[1]
        aligned = [rescale_feature(f3, h, w, conv_per[i]) for f3 in refined]
        outputs.append(fuse(aligned))
    return tuple(outputs)
