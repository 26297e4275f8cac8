"""Simulation toolkit for 2-D compass codes under biased Pauli noise.

Construction of gauge-fixed compass codes from plaquette colorings,
weighted decoder graphs (2-D and spacetime), asymmetrically-weighted
union-find and minimum-weight perfect-matching decoders, Monte Carlo
threshold estimation, and the random-bond Ising model criticality map.
"""

__version__ = "0.1.0"

from .codes import CompassCode, build_code, validate_code
from .colorings import (
    BLANK,
    BLUE,
    RED,
    Coloring,
    elongated_coloring,
    shor_density_coloring,
    surface_density_coloring,
    tailored_coloring,
)
from .graphs import (
    DecoderGraph,
    build_spacetime_graph,
    build_x_error_graph,
    build_z_error_graph,
    syndrome_of,
)
from .harness import (
    BatchConfig,
    BiasSweep,
    ThresholdEstimate,
    TrialBatch,
    estimate_threshold,
    gv_gap,
    repetition_oracle,
    run_batch,
    run_trial,
    sweep_bias,
    wilson_interval,
    write_csv,
)
from .mwpm import DefectGraph, MWPMDecoder
from .noise import (
    BiasedChannel,
    NoiseMap,
    PauliSample,
    channel_from_bias,
    linear_profile_map,
    measurement_rates,
    random_uniform_map,
    sample_pauli,
    uniform_map,
)
from .rbim import (
    RBIMInstance,
    binder_cumulant,
    build_rbim,
    cluster_sweep,
    find_critical,
    nishimori_beta,
)
from .uf import ClusterState, ErasureForest, UnionFindDecoder, trace_growth

__all__ = [
    "BLANK",
    "BLUE",
    "RED",
    "BatchConfig",
    "BiasSweep",
    "BiasedChannel",
    "ClusterState",
    "Coloring",
    "CompassCode",
    "DecoderGraph",
    "DefectGraph",
    "ErasureForest",
    "MWPMDecoder",
    "NoiseMap",
    "PauliSample",
    "RBIMInstance",
    "ThresholdEstimate",
    "TrialBatch",
    "UnionFindDecoder",
    "binder_cumulant",
    "build_code",
    "build_rbim",
    "build_spacetime_graph",
    "build_x_error_graph",
    "build_z_error_graph",
    "channel_from_bias",
    "cluster_sweep",
    "elongated_coloring",
    "estimate_threshold",
    "find_critical",
    "gv_gap",
    "linear_profile_map",
    "measurement_rates",
    "nishimori_beta",
    "random_uniform_map",
    "repetition_oracle",
    "run_batch",
    "run_trial",
    "sample_pauli",
    "shor_density_coloring",
    "surface_density_coloring",
    "sweep_bias",
    "syndrome_of",
    "tailored_coloring",
    "trace_growth",
    "uniform_map",
    "validate_code",
    "wilson_interval",
    "write_csv",
]
