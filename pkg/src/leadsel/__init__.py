"""Greedy leader selection on networks with fast grounded-Laplacian oracles."""

from .graph import (
    Graph,
    NodePartition,
    SbmParams,
    gen_ba,
    gen_er,
    gen_rg,
    gen_sbm,
    is_connected,
    laplacian,
    partition_equal,
)
from .greedy import (
    SelectionTrace,
    distributed_greedy,
    lazy_greedy,
    ordinary_greedy,
    run_algorithm,
    sample_size,
    stochastic_greedy,
)
from .oracle import brute_force_optimum, first_iteration_gains, objective

__version__ = "0.1.0"

__all__ = [
    "Graph",
    "NodePartition",
    "SbmParams",
    "SelectionTrace",
    "brute_force_optimum",
    "distributed_greedy",
    "first_iteration_gains",
    "gen_ba",
    "gen_er",
    "gen_rg",
    "gen_sbm",
    "is_connected",
    "laplacian",
    "lazy_greedy",
    "objective",
    "ordinary_greedy",
    "partition_equal",
    "run_algorithm",
    "sample_size",
    "stochastic_greedy",
]
