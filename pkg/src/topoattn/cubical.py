"""Sublevel cubical filtrations of 2-D level maps and their persistence.

Pixels are the top-dimensional cells; every vertex and edge inherits the
minimum level over its incident pixels, so the sublevel set at threshold
t is exactly the union of closed pixels with level <= t.  Consequences
used throughout:

* connected components of the sublevel set are the 8-connected
  components of the foreground pixels {level <= t} (diagonal pixels
  share a vertex);
* by planar duality, 1-cycles correspond to bounded components of the
  complement, i.e. 4-connected components of background pixels that are
  cut off from the image border.

Dimension-0 pairs come from a union-find sweep over pixels in
increasing level order (elder rule, ties broken by the lexicographically
smaller (row, col) of the component's minimal pixel).  Dimension-1 pairs
come from the dual sweep in decreasing order over background pixels with
a virtual outside node.  Zero-persistence pairs are discarded; the one
essential component is reported with death = +inf.

``betti_oracle`` is an independent check: dimension 0 by flood fill,
dimension 1 via the Euler characteristic of the sublevel cells.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numba import njit
from scipy import ndimage

from .errors import ValidationError
from .grid import LevelMap, _write_atomic


@dataclass(frozen=True)
class CubicalFiltration:
    """Cell values of the filtered complex built from a level map.

    Shapes: vertices (H+1, W+1); horizontal edges (H+1, W); vertical
    edges (H, W+1); squares (H, W).  Monotone: value(face) <=
    value(coface) for every incidence.
    """

    width: int
    height: int
    l_max: int
    vertex_values: np.ndarray
    h_edge_values: np.ndarray
    v_edge_values: np.ndarray
    square_values: np.ndarray

    @property
    def cell_count(self) -> int:
        w, h = self.width, self.height
        return (w + 1) * (h + 1) + w * (h + 1) + h * (w + 1) + w * h


class PersistencePair(NamedTuple):
    dim: int
    birth: int
    death: float  # integer level, or math.inf for the essential class


@dataclass(frozen=True)
class PersistenceDiagram:
    pairs: tuple[PersistencePair, ...]
    l_max: int

    def select(self, dim: int) -> tuple[PersistencePair, ...]:
        return tuple(p for p in self.pairs if p.dim == dim)


def build_filtration(levels: LevelMap) -> CubicalFiltration:
    """Assign each vertex/edge the min level over its incident pixels."""
    lv = levels.levels
    sentinel = levels.l_max + 1  # never survives a min: every cell touches a pixel
    padded = np.pad(lv, 1, constant_values=sentinel)
    vertex = np.minimum.reduce(
        [padded[:-1, :-1], padded[:-1, 1:], padded[1:, :-1], padded[1:, 1:]]
    )
    h_edge = np.minimum(padded[:-1, 1:-1], padded[1:, 1:-1])
    v_edge = np.minimum(padded[1:-1, :-1], padded[1:-1, 1:])
    for arr in (vertex, h_edge, v_edge):
        arr.flags.writeable = False
    return CubicalFiltration(
        width=levels.width,
        height=levels.height,
        l_max=levels.l_max,
        vertex_values=vertex,
        h_edge_values=h_edge,
        v_edge_values=v_edge,
        square_values=lv,
    )


@njit(cache=True, nogil=True)
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]  # path halving
        x = parent[x]
    return x


@njit(cache=True, nogil=True)
def _component_pairs(flat, order, height, width):
    """Union-find over pixels in increasing (level, index) order.

    Merging two components at the current pixel's level kills the one
    with the larger (birth level, birth index); emits (birth, death)
    for every positive-persistence merge.  Returns the essential birth
    as the third value.
    """
    n = flat.size
    parent = np.full(n, -1, np.int64)
    birth_level = np.empty(n, np.int64)
    birth_idx = np.empty(n, np.int64)
    births = np.empty(n, np.int64)
    deaths = np.empty(n, np.int64)
    m = 0
    for k in range(n):
        p = order[k]
        level = flat[p]
        parent[p] = p
        birth_level[p] = level
        birth_idx[p] = p
        r = p // width
        c = p % width
        for dr in range(-1, 2):
            for dc in range(-1, 2):
                if dr == 0 and dc == 0:
                    continue
                rr = r + dr
                cc = c + dc
                if rr < 0 or rr >= height or cc < 0 or cc >= width:
                    continue
                q = rr * width + cc
                if parent[q] < 0:
                    continue
                ra = _find(parent, p)
                rb = _find(parent, q)
                if ra == rb:
                    continue
                if (birth_level[ra], birth_idx[ra]) < (birth_level[rb], birth_idx[rb]):
                    elder, younger = ra, rb
                else:
                    elder, younger = rb, ra
                if level > birth_level[younger]:
                    births[m] = birth_level[younger]
                    deaths[m] = level
                    m += 1
                parent[younger] = elder
    essential = birth_level[_find(parent, order[0])]
    return births[:m], deaths[:m], essential


@njit(cache=True, nogil=True)
def _hole_pairs(flat, order_desc, height, width):
    """Dual union-find over background pixels in decreasing level order.

    Background pixels (4-connected, plus a virtual outside node reached
    from the border) merge as the threshold drops; each merge that kills
    a bounded region is a 1-cycle born at the merge level and dead at
    the region's maximum pixel level.
    """
    n = flat.size
    outside = n
    big = np.int64(1) << 40  # exceeds any level; makes the outside the elder
    parent = np.full(n + 1, -1, np.int64)
    birth_level = np.empty(n + 1, np.int64)
    birth_idx = np.empty(n + 1, np.int64)
    parent[outside] = outside
    birth_level[outside] = big
    birth_idx[outside] = -1
    births = np.empty(n, np.int64)
    deaths = np.empty(n, np.int64)
    m = 0
    for k in range(n):
        p = order_desc[k]
        level = flat[p]
        parent[p] = p
        birth_level[p] = level
        birth_idx[p] = p
        r = p // width
        c = p % width
        for step in range(5):
            if step == 0:
                if r == 0 or r == height - 1 or c == 0 or c == width - 1:
                    q = outside
                else:
                    continue
            else:
                if step == 1:
                    rr, cc = r - 1, c
                elif step == 2:
                    rr, cc = r + 1, c
                elif step == 3:
                    rr, cc = r, c - 1
                else:
                    rr, cc = r, c + 1
                if rr < 0 or rr >= height or cc < 0 or cc >= width:
                    continue
                q = rr * width + cc
                if parent[q] < 0:
                    continue
            ra = _find(parent, p)
            rb = _find(parent, q)
            if ra == rb:
                continue
            # Elder has the larger birth level; ties by smaller index.
            if (-birth_level[ra], birth_idx[ra]) < (-birth_level[rb], birth_idx[rb]):
                elder, younger = ra, rb
            else:
                elder, younger = rb, ra
            if birth_level[younger] > level:
                births[m] = level
                deaths[m] = birth_level[younger]
                m += 1
            parent[younger] = elder
    return births[:m], deaths[:m]


def compute_persistence(filt: CubicalFiltration) -> PersistenceDiagram:
    """Full 0- and 1-dimensional diagram of the sublevel filtration."""
    flat = np.ascontiguousarray(filt.square_values.ravel())
    n = flat.size
    idx = np.arange(n)
    order_inc = np.lexsort((idx, flat))
    order_dec = np.lexsort((idx, -flat))
    b0, d0, essential = _component_pairs(flat, order_inc, filt.height, filt.width)
    b1, d1 = _hole_pairs(flat, order_dec, filt.height, filt.width)
    pairs = [PersistencePair(0, int(b), int(d)) for b, d in zip(b0, d0)]
    pairs.append(PersistencePair(0, int(essential), math.inf))
    pairs.extend(PersistencePair(1, int(b), int(d)) for b, d in zip(b1, d1))
    pairs.sort(key=lambda p: (p.dim, p.birth, p.death))
    return PersistenceDiagram(tuple(pairs), filt.l_max)


_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def betti_oracle(levels: LevelMap, t: int, dim: int) -> int:
    """Betti number of the sublevel set at threshold t, by brute force.

    dim 0: flood-fill count of 8-connected foreground components.
    dim 1: beta_0 - chi with chi = #V - #E + #F over sublevel cells.
    """
    if dim not in (0, 1):
        raise ValidationError(f"dim must be 0 or 1, got {dim}")
    if not 0 <= t <= levels.l_max:
        raise ValidationError(f"threshold {t} outside [0, {levels.l_max}]")
    mask = levels.levels <= t
    beta0 = int(ndimage.label(mask, structure=_EIGHT_CONNECTED)[1])
    if dim == 0:
        return beta0
    lv = levels.levels
    padded = np.pad(lv, 1, constant_values=levels.l_max + 1)
    n_vertices = int(
        (
            np.minimum(
                np.minimum(padded[:-1, :-1], padded[:-1, 1:]),
                np.minimum(padded[1:, :-1], padded[1:, 1:]),
            )
            <= t
        ).sum()
    )
    n_edges = int((np.minimum(padded[:-1, 1:-1], padded[1:, 1:-1]) <= t).sum()) + int(
        (np.minimum(padded[1:-1, :-1], padded[1:-1, 1:]) <= t).sum()
    )
    n_faces = int(mask.sum())
    chi = n_vertices - n_edges + n_faces
    return beta0 - chi


def diagram_betti(pd: PersistenceDiagram, t: int, dim: int) -> int:
    """Number of dim-dimensional classes alive at t: #{(b, d) : b <= t < d}."""
    return sum(1 for p in pd.pairs if p.dim == dim and p.birth <= t < p.death)


def write_diagram_csv(pd: PersistenceDiagram, path):
    """CSV rows `dim,birth,death`, death written as `inf` when essential."""
    lines = ["dim,birth,death"]
    for p in pd.pairs:
        death = "inf" if math.isinf(p.death) else str(int(p.death))
        lines.append(f"{p.dim},{p.birth},{death}")
    _write_atomic(path, ("\n".join(lines) + "\n").encode("ascii"))
