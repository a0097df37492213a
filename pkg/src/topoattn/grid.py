"""2-D scalar grids plus bit-exact file I/O and quantization.

``GridMap`` holds a probability-like field with values meant to live in
[0, 1]; ``LevelMap`` holds its integer quantization onto the 0..L_max
threshold scale that the filtration machinery consumes.  Two file
formats are supported:

* PGM (P2 ASCII and P5 binary, maxval <= 65535) for interchange with
  standard image tooling; values are normalized by maxval on load.
* TNSR, a minimal raw-float container: an ASCII magic line ``TNSR1``, an
  ASCII line ``<ndim> <d0> <d1> ...``, then exactly prod(d_i)
  little-endian 32-bit floats in row-major order.  Round-trips are
  bit-exact.

All grid types are immutable after construction (backing arrays are
marked read-only), so instances can be shared freely across threads.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import PgmParseError, TnsrFormatError, ValidationError

MAX_LEVEL_BOUND = 65535

_PGM_WHITESPACE = b" \t\n\r\x0b\x0c"


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, halves away from zero (locale-free)."""
    x = np.asarray(x, dtype=np.float64)
    out = np.where(x >= 0.0, np.floor(x + 0.5), np.ceil(x - 0.5))
    return out.astype(np.int64)


@dataclass(frozen=True)
class GridMap:
    """2-D scalar field, row-major, finite float32 values."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float32, order="C")
        if arr.ndim != 2:
            raise ValidationError(f"grid must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"grid dims must be >= 1, got {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValidationError("grid contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class LevelMap:
    """Integer quantization of a grid onto the scale 0..l_max."""

    levels: np.ndarray
    l_max: int = 255

    def __post_init__(self):
        arr = np.array(self.levels, dtype=np.int64, order="C")
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValidationError(f"level map dims must be >= 1, got shape {arr.shape}")
        if not 1 <= self.l_max <= MAX_LEVEL_BOUND:
            raise ValidationError(f"l_max must be in [1, {MAX_LEVEL_BOUND}], got {self.l_max}")
        if arr.min() < 0 or arr.max() > self.l_max:
            raise ValidationError(f"levels must lie in [0, {self.l_max}]")
        arr.flags.writeable = False
        object.__setattr__(self, "levels", arr)

    @property
    def height(self) -> int:
        return self.levels.shape[0]

    @property
    def width(self) -> int:
        return self.levels.shape[1]


def quantize(grid: GridMap, l_max: int = 255) -> LevelMap:
    """Map values in [0, 1] onto integer levels 0..l_max.

    level = round(value * l_max), halves away from zero.  Monotone
    nondecreasing in the input value for a fixed l_max.
    """
    if l_max < 1:
        raise ValidationError(f"l_max must be >= 1, got {l_max}")
    vals = grid.values.astype(np.float64)
    if vals.min() < 0.0 or vals.max() > 1.0:
        raise ValidationError("value outside [0, 1]")
    return LevelMap(round_half_away(vals * float(l_max)), l_max)


def _write_atomic(path, data: bytes):
    path = os.fspath(path)
    tmp = f"{path}.{os.getpid()}.tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# PGM (netpbm P2 / P5)
# ---------------------------------------------------------------------------


def _skip_pgm_filler(data: bytes, pos: int) -> int:
    # Whitespace and '#'-to-newline comments may separate header tokens.
    while pos < len(data):
        ch = data[pos : pos + 1]
        if ch in _PGM_WHITESPACE:
            pos += 1
        elif ch == b"#":
            nl = data.find(b"\n", pos)
            pos = len(data) if nl < 0 else nl + 1
        else:
            break
    return pos


def _pgm_token(data: bytes, pos: int) -> tuple[bytes, int, int]:
    pos = _skip_pgm_filler(data, pos)
    start = pos
    while pos < len(data) and data[pos : pos + 1] not in _PGM_WHITESPACE and data[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise PgmParseError("malformed header: unexpected end of data", start)
    return data[start:pos], start, pos


def _pgm_int(data: bytes, pos: int, what: str) -> tuple[int, int, int]:
    tok, start, pos = _pgm_token(data, pos)
    if not tok.isdigit():
        raise PgmParseError(f"malformed header: bad {what} {tok!r}", start)
    return int(tok), start, pos


def parse_pgm(data: bytes) -> tuple[np.ndarray, int]:
    """Parse PGM bytes into (levels array (H, W) int64, maxval)."""
    magic, start, pos = _pgm_token(data, 0)
    if magic not in (b"P2", b"P5"):
        raise PgmParseError(f"malformed header: unsupported magic {magic!r}", start)
    width, start, pos = _pgm_int(data, pos, "width")
    height, start, pos = _pgm_int(data, pos, "height")
    if width < 1 or height < 1:
        raise PgmParseError(f"invalid dimensions {width}x{height}", start)
    maxval, mv_start, pos = _pgm_int(data, pos, "maxval")
    if maxval == 0:
        raise PgmParseError("invalid maxval 0", mv_start)
    if maxval > MAX_LEVEL_BOUND:
        raise PgmParseError(f"invalid maxval {maxval} > {MAX_LEVEL_BOUND}", mv_start)
    n = width * height

    if magic == b"P2":
        samples = np.empty(n, dtype=np.int64)
        for i in range(n):
            try:
                value, start, pos = _pgm_int(data, pos, "sample")
            except PgmParseError:
                raise PgmParseError(
                    f"truncated payload: expected {n} samples, got {i}", len(data)
                ) from None
            if value > maxval:
                raise PgmParseError(f"sample {value} exceeds maxval {maxval}", start)
            samples[i] = value
        tail = _skip_pgm_filler(data, pos)
        if tail != len(data):
            raise PgmParseError("trailing data after raster", tail)
    else:
        # Exactly one whitespace byte separates the maxval from the raster.
        if pos >= len(data) or data[pos : pos + 1] not in _PGM_WHITESPACE:
            raise PgmParseError("missing raster separator", pos)
        pos += 1
        bytes_per = 1 if maxval < 256 else 2
        need = n * bytes_per
        avail = len(data) - pos
        if avail < need:
            raise PgmParseError(
                f"truncated payload: expected {need} raster bytes, got {avail}", len(data)
            )
        if avail > need:
            raise PgmParseError("trailing data after raster", pos + need)
        raw = np.frombuffer(data, dtype=(">u2" if bytes_per == 2 else "u1"), count=n, offset=pos)
        samples = raw.astype(np.int64)
        bad = samples > maxval
        if bad.any():
            i = int(np.argmax(bad))
            raise PgmParseError(
                f"sample {samples[i]} exceeds maxval {maxval}", pos + i * bytes_per
            )

    return samples.reshape(height, width), maxval


def load_pgm(path) -> GridMap:
    """Load a PGM file; values are sample/maxval, each in [0, 1]."""
    with open(path, "rb") as fh:
        data = fh.read()
    levels, maxval = parse_pgm(data)
    return GridMap(levels.astype(np.float64) / float(maxval))


def save_pgm(levels: LevelMap, path):
    """Write a LevelMap as binary P5 with maxval = l_max."""
    header = f"P5\n{levels.width} {levels.height}\n{levels.l_max}\n".encode("ascii")
    if levels.l_max < 256:
        payload = levels.levels.astype("u1").tobytes(order="C")
    else:
        payload = levels.levels.astype(">u2").tobytes(order="C")
    _write_atomic(path, header + payload)


# ---------------------------------------------------------------------------
# TNSR raw tensor format
# ---------------------------------------------------------------------------


def save_tnsr(array: np.ndarray, path):
    """Write an array as TNSR (little-endian float32, row-major)."""
    arr = np.asarray(array)
    if arr.ndim < 1:
        raise ValidationError("TNSR requires at least one dimension")
    if not np.isfinite(arr).all():
        raise ValidationError("refusing to write non-finite values")
    dims = " ".join(str(d) for d in arr.shape)
    header = f"TNSR1\n{arr.ndim} {dims}\n".encode("ascii")
    _write_atomic(path, header + arr.astype("<f4").tobytes(order="C"))


def load_tnsr(path) -> np.ndarray:
    """Read a TNSR file back into a float32 array."""
    with open(path, "rb") as fh:
        data = fh.read()
    nl1 = data.find(b"\n")
    if nl1 < 0 or data[:nl1] != b"TNSR1":
        raise TnsrFormatError(f"bad magic {data[:nl1 if nl1 >= 0 else 16]!r}")
    nl2 = data.find(b"\n", nl1 + 1)
    if nl2 < 0:
        raise TnsrFormatError("missing dimension header")
    fields = data[nl1 + 1 : nl2].split()
    try:
        nums = [int(f) for f in fields]
    except ValueError:
        raise TnsrFormatError(f"malformed dimension header {data[nl1 + 1:nl2]!r}") from None
    if len(nums) < 2 or nums[0] != len(nums) - 1:
        raise TnsrFormatError(f"malformed dimension header {data[nl1 + 1:nl2]!r}")
    dims = nums[1:]
    if any(d < 1 for d in dims):
        raise TnsrFormatError(f"invalid dimensions {dims}")
    count = int(np.prod(dims))
    payload = data[nl2 + 1 :]
    if len(payload) != 4 * count:
        raise TnsrFormatError(
            f"payload size mismatch: expected {4 * count} bytes, got {len(payload)}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(dims)
    return arr.astype(np.float32, copy=True)


def save_tensor(grid: GridMap, path):
    """Write a GridMap as a 2-D TNSR file (bit-exact round-trip)."""
    save_tnsr(grid.values, path)


def load_tensor(path) -> GridMap:
    arr = load_tnsr(path)
    if arr.ndim != 2:
        raise TnsrFormatError(f"expected a 2-D tensor, got ndim={arr.ndim}")
    return GridMap(arr)
