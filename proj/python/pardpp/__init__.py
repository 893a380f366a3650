"""Parallel sampling for determinantal point processes and planar matchings."""

from ._pardpp import (
    Error,
    Model,
    PlanarGraph,
    brute_force_distribution,
    count_matchings,
    duplicate_probability,
    edge_marginal,
    empirical_distribution,
    find_separator,
    kl_divergence,
    load_model,
    read_graph,
    renyi_divergence,
    sample,
    sample_matching,
    statistical_tv_tolerance,
    tv_distance,
)

__version__ = "0.1.0"

__all__ = [
    "Error",
    "Model",
    "PlanarGraph",
    "brute_force_distribution",
    "count_matchings",
    "duplicate_probability",
    "edge_marginal",
    "empirical_distribution",
    "find_separator",
    "kl_divergence",
    "load_model",
    "read_graph",
    "renyi_divergence",
    "sample",
    "sample_matching",
    "statistical_tv_tolerance",
    "tv_distance",
]
