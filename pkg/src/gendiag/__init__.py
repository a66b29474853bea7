"""Generalized MCMC convergence diagnostics for chains over arbitrary state spaces."""

from .diagnostics import (
    DiagnosticReport, Lanfear, NearestNeighbor, ess, psrf, run_generalized_diagnostic,
    standard_diagnostics, traceplot_table,
)
from .distances import (
    Euclidean, FunctionDistance, Hamming, MetropolisHastings, UserTable, euclidean, hamming,
    mh_distance, pairwise_matrix,
)
from .proximity import apply_map, cut_point_select, lanfear_map, nn_tour
from .states import (
    BinaryMatrix, Chain, ChainSet, Partition, RealVector, build_chain_set, canonicalize,
    coassociation,
)

__all__ = [
    "BinaryMatrix", "Chain", "ChainSet", "DiagnosticReport", "Euclidean", "FunctionDistance",
    "Hamming", "Lanfear", "MetropolisHastings", "NearestNeighbor", "Partition", "RealVector",
    "UserTable", "apply_map", "build_chain_set", "canonicalize", "coassociation",
    "cut_point_select", "ess", "euclidean", "hamming", "lanfear_map", "mh_distance", "nn_tour",
    "pairwise_matrix", "psrf", "run_generalized_diagnostic", "standard_diagnostics",
    "traceplot_table",
]
