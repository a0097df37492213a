"""Command-line front end.

Subcommands: pd (persistence diagram CSV), attn (attention map), betti
(Betti number at a threshold), ssm-check (recurrence/convolution duality
self-check), fuse (multi-scale fusion of TNSR tensors), batch (attention
maps for a directory of PGMs, optionally in parallel).

Exit codes: 0 success, 1 usage/validation error, 2 I/O error, 3
internal error.  Output bytes depend only on input bytes and flags.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .attention import AttnConfig, generate_attention_map
from .cubical import betti_oracle, build_filtration, compute_persistence, write_diagram_csv
from .errors import ValidationError
from .fusion import AttentionMap, ScalePyramid, sdi_fuse
from .grid import LevelMap, load_pgm, load_tnsr, quantize, round_half_away, save_pgm, save_tnsr
from .ssm import duality_max_error

DUALITY_TOLERANCE = 1e-6


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


@dataclass(frozen=True)
class RunConfig:
    """Settings carried to batch workers."""

    input_path: str
    output_path: str
    attn: AttnConfig
    out_format: str

    def __post_init__(self):
        if not self.input_path or not self.output_path:
            raise ValidationError("paths must be nonempty")
        if self.out_format not in ("tnsr", "pgm"):
            raise ValidationError(f"unknown output format {self.out_format!r}")


def _attn_flags(sub):
    sub.add_argument("--percentile", type=float, default=50.0)
    sub.add_argument("--tolerance", type=int, default=0)
    sub.add_argument("--scale", type=float, default=1.0)
    sub.add_argument("--normalize", action="store_true")


def _attn_config(args) -> AttnConfig:
    return AttnConfig(
        percentile=args.percentile,
        birth_tolerance=args.tolerance,
        scale=args.scale,
        normalize=args.normalize,
    )


def _save_attention(attn, path):
    if path.endswith(".tnsr"):
        save_tnsr(attn.weights, path)
    elif path.endswith(".pgm"):
        levels = round_half_away(attn.weights.astype("float64") * 255.0)
        save_pgm(LevelMap(levels, 255), path)
    else:
        raise ValidationError(f"output must end in .tnsr or .pgm, got {path!r}")


def _cmd_pd(args) -> int:
    levels = quantize(load_pgm(args.input))
    write_diagram_csv(compute_persistence(build_filtration(levels)), args.output)
    return 0


def _cmd_attn(args) -> int:
    attn = generate_attention_map(load_pgm(args.input), _attn_config(args))
    _save_attention(attn, args.output)
    return 0


def _cmd_betti(args) -> int:
    levels = quantize(load_pgm(args.input))
    print(betti_oracle(levels, args.threshold, args.dim))
    return 0


def _cmd_ssm_check(args) -> int:
    if args.state_dim < 1:
        raise ValidationError(f"--state-dim must be >= 1, got {args.state_dim}")
    err = duality_max_error(args.state_dim, args.length, args.trials, args.seed)
    ok = err <= DUALITY_TOLERANCE
    print(f"max duality error: {err:.6e}")
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


def _cmd_fuse(args) -> int:
    pyramid = ScalePyramid(tuple(load_tnsr(p).astype("float64") for p in args.features))
    attention = AttentionMap(load_tnsr(args.attention))
    outputs = sdi_fuse(pyramid, attention)
    os.makedirs(args.output_dir, exist_ok=True)
    for i, out in enumerate(outputs, start=1):
        save_tnsr(out, os.path.join(args.output_dir, f"fused_{i}.tnsr"))
    return 0


def _process_image(job: tuple[RunConfig, str]) -> float:
    cfg, name = job
    start = time.perf_counter()
    attn = generate_attention_map(load_pgm(os.path.join(cfg.input_path, name)), cfg.attn)
    stem = name[: -len(".pgm")]
    _save_attention(attn, os.path.join(cfg.output_path, f"{stem}.{cfg.out_format}"))
    return (time.perf_counter() - start) * 1000.0


def _cmd_batch(args) -> int:
    if args.jobs < 1:
        raise ValidationError(f"--jobs must be >= 1, got {args.jobs}")
    cfg = RunConfig(args.input_dir, args.output_dir, _attn_config(args), args.format)
    names = sorted(n for n in os.listdir(args.input_dir) if n.endswith(".pgm"))
    os.makedirs(args.output_dir, exist_ok=True)
    jobs = [(cfg, name) for name in names]
    start = time.perf_counter()
    if args.jobs == 1 or len(jobs) <= 1:
        times = [_process_image(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            times = list(pool.map(_process_image, jobs))
    total = (time.perf_counter() - start) * 1000.0
    mean = sum(times) / len(times) if times else 0.0
    print(f"images: {len(times)}  mean: {mean:.3f} ms/image  total: {total:.3f} ms")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="topoattn")
    subs = parser.add_subparsers(dest="command", required=True)

    pd = subs.add_parser("pd", help="persistence diagram of a PGM, as CSV")
    pd.add_argument("input")
    pd.add_argument("output")
    pd.set_defaults(func=_cmd_pd)

    attn = subs.add_parser("attn", help="attention map of a PGM (.tnsr or .pgm)")
    attn.add_argument("input")
    attn.add_argument("output")
    _attn_flags(attn)
    attn.set_defaults(func=_cmd_attn)

    betti = subs.add_parser("betti", help="Betti number at a threshold")
    betti.add_argument("input")
    betti.add_argument("--threshold", type=int, required=True)
    betti.add_argument("--dim", type=int, choices=(0, 1), required=True)
    betti.set_defaults(func=_cmd_betti)

    ssm = subs.add_parser("ssm-check", help="recurrence vs convolution duality check")
    ssm.add_argument("--state-dim", type=int, default=16)
    ssm.add_argument("--length", type=int, default=64)
    ssm.add_argument("--trials", type=int, default=100)
    ssm.add_argument("--seed", type=int, default=0)
    ssm.set_defaults(func=_cmd_ssm_check)

    fuse_p = subs.add_parser("fuse", help="multi-scale fusion of TNSR feature tensors")
    fuse_p.add_argument("--features", nargs=4, required=True)
    fuse_p.add_argument("--attention", required=True)
    fuse_p.add_argument("--output-dir", required=True)
    fuse_p.set_defaults(func=_cmd_fuse)

    batch = subs.add_parser("batch", help="attention maps for every PGM in a directory")
    batch.add_argument("--input-dir", required=True)
    batch.add_argument("--output-dir", required=True)
    batch.add_argument("--jobs", type=int, default=1)
    batch.add_argument("--format", choices=("tnsr", "pgm"), default="tnsr")
    _attn_flags(batch)
    batch.set_defaults(func=_cmd_batch)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # invariant violation; never expected
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
