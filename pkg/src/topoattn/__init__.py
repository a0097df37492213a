"""Topology attention maps from 2-D probability maps via cubical
persistent homology, plus verified state-space and multi-scale fusion
reference kernels."""

from .attention import (
    AttentionMap,
    AttnConfig,
    PersistenceScoreMap,
    filter_significant,
    generate_attention_map,
    lifespan,
    score_map,
    to_attention,
)
from .cubical import (
    CubicalFiltration,
    PersistenceDiagram,
    PersistencePair,
    betti_oracle,
    build_filtration,
    compute_persistence,
    diagram_betti,
    write_diagram_csv,
)
from .errors import PgmParseError, TnsrFormatError, ValidationError
from .fusion import (
    ScalePyramid,
    cbam_stub,
    channel_reduce,
    fuse,
    hadamard_inject,
    rescale_feature,
    resize_attention,
    sdi_fuse,
)
from .grid import (
    GridMap,
    LevelMap,
    load_pgm,
    load_tensor,
    load_tnsr,
    parse_pgm,
    quantize,
    round_half_away,
    save_pgm,
    save_tensor,
    save_tnsr,
)
from .ssm import (
    DiscreteSSM,
    SSMParams,
    apply_conv,
    conv_kernel,
    cross_merge,
    cross_scan,
    discretize_zoh,
    duality_max_error,
    exp_and_phi1,
    random_stable_system,
    scan_recurrence,
)
from .synth import synthetic_probability_map

__version__ = "0.1.0"

__all__ = [
    "AttentionMap",
    "AttnConfig",
    "CubicalFiltration",
    "DiscreteSSM",
    "GridMap",
    "LevelMap",
    "PersistenceDiagram",
    "PersistencePair",
    "PersistenceScoreMap",
    "PgmParseError",
    "SSMParams",
    "ScalePyramid",
    "TnsrFormatError",
    "ValidationError",
    "apply_conv",
    "betti_oracle",
    "build_filtration",
    "cbam_stub",
    "channel_reduce",
    "compute_persistence",
    "conv_kernel",
    "cross_merge",
    "cross_scan",
    "diagram_betti",
    "discretize_zoh",
    "duality_max_error",
    "exp_and_phi1",
    "filter_significant",
    "fuse",
    "generate_attention_map",
    "hadamard_inject",
    "lifespan",
    "load_pgm",
    "load_tensor",
    "load_tnsr",
    "parse_pgm",
    "quantize",
    "random_stable_system",
    "rescale_feature",
    "resize_attention",
    "round_half_away",
    "save_pgm",
    "save_tensor",
    "save_tnsr",
    "scan_recurrence",
    "score_map",
    "sdi_fuse",
    "synthetic_probability_map",
    "to_attention",
    "write_diagram_csv",
]
