"""Exact curvature, homology and rigidity computations on weighted graphs."""
from .graph_core import (
    MarkovChain,
    Metric,
    ModelError,
    PreconditionError,
    WeightedGraph,
    degree_stats,
    dump_graph,
    invariant_distribution,
    parse_graph,
    path_metric,
    to_markov,
)

__version__ = "0.1.0"

__all__ = [
    "MarkovChain",
    "Metric",
    "ModelError",
    "PreconditionError",
    "WeightedGraph",
    "degree_stats",
    "dump_graph",
    "invariant_distribution",
    "parse_graph",
    "path_metric",
    "to_markov",
]
