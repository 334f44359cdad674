"""Capacity-constrained graph partitioning by recursive relaxed bisection.

A bisection relaxes the 0-1 model to angles, minimizes it with a subspace
minimization conjugate gradient solver, rounds with random hyperplanes and
polishes the result with moves and swaps.  :func:`partition` recurses until
every part fits its capacity.
"""

from .bench import GpkcRecipe, brute_force_optimum, gap_percent, generate_gpkc, run_experiment
from .driver import PartitionForest, PipelineConfig, partition, partition_once, refine_partition
from .graph import (
    NO_FIXED,
    Bipartition,
    CapacityBound,
    FixedAssignment,
    Hypergraph,
    InputError,
    WeightedGraph,
    build_laplacian,
    check_feasibility,
    clique_edges,
    cut_size,
    expand_hypergraph,
    labels_cut,
)
from .model import ReducedQuadratic, eliminate_and_penalize, gradient, objective, value_and_gradient
from .refine import improve, repair_toward_feasibility
from .rounding import AugmentationExhausted, RoundingConfig, round_and_select
from .smcg import SolverConfig, SolveReport, Status, solve

__all__ = [
    "AugmentationExhausted",
    "Bipartition",
    "CapacityBound",
    "FixedAssignment",
    "GpkcRecipe",
    "Hypergraph",
    "InputError",
    "NO_FIXED",
    "PartitionForest",
    "PipelineConfig",
    "ReducedQuadratic",
    "RoundingConfig",
    "SolveReport",
    "SolverConfig",
    "Status",
    "WeightedGraph",
    "brute_force_optimum",
    "build_laplacian",
    "check_feasibility",
    "clique_edges",
    "cut_size",
    "eliminate_and_penalize",
    "expand_hypergraph",
    "gap_percent",
    "generate_gpkc",
    "gradient",
    "improve",
    "labels_cut",
    "objective",
    "partition",
    "partition_once",
    "refine_partition",
    "repair_toward_feasibility",
    "round_and_select",
    "run_experiment",
    "solve",
    "value_and_gradient",
]

__version__ = "0.1.0"
