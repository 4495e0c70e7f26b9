"""Tropical (min-plus) linear algebra toolkit.

Shortest-path matrices over the min-plus semiring, min-plus linear
regression in the infinity and Euclidean norms, min-plus low-rank
factorizations of distance matrices, and classical baselines (SVD, NNMF)
for comparison, plus a batch CLI.
"""

from .baselines import NnmfResult, SvdResult, nnmf, svd, svd_truncate
from .core import (
    INF,
    TropicalMatrix,
    frobenius_distance,
    identity,
    is_idempotent,
    kleene_star,
    mp_multiply,
    mp_power,
    read_matrix_csv,
    tropical_allclose,
    write_matrix_csv,
)
from .errors import (
    DomainError,
    MinPlusError,
    NegativeCycleError,
    ParseError,
    ScaleRefusalError,
    ShapeError,
    UnboundedColumnError,
)
from .factorization import (
    FactorPair,
    NonsymFactorConfig,
    SymFactorConfig,
    actual_waypoint,
    actual_waypoint_search,
    jacobi_map,
    nonsym_factorize,
    residual_of_given_factor,
    sym_factorize,
)
from .graphs import (
    Graph,
    graph_to_adjacency,
    graph_to_tropical,
    load_edge_list,
    load_gml_subset,
    oracle_min_path_fixed_length,
    render_edge_list,
    shortest_path_matrix,
)
from .regression import (
    ActivePattern,
    RegressionConfig,
    RegressionOutcome,
    active_pattern,
    chebyshev_regression,
    min_plus_apply,
    newton_directed_line_search,
    newton_target,
    principal_solution,
    restricted_newton_target,
)

__version__ = "0.1.0"

__all__ = [
    "ActivePattern",
    "DomainError",
    "FactorPair",
    "Graph",
    "INF",
    "MinPlusError",
    "NegativeCycleError",
    "NnmfResult",
    "NonsymFactorConfig",
    "ParseError",
    "RegressionConfig",
    "RegressionOutcome",
    "ScaleRefusalError",
    "ShapeError",
    "SvdResult",
    "SymFactorConfig",
    "TropicalMatrix",
    "UnboundedColumnError",
    "active_pattern",
    "actual_waypoint",
    "actual_waypoint_search",
    "chebyshev_regression",
    "frobenius_distance",
    "graph_to_adjacency",
    "graph_to_tropical",
    "identity",
    "is_idempotent",
    "jacobi_map",
    "kleene_star",
    "load_edge_list",
    "load_gml_subset",
    "min_plus_apply",
    "mp_multiply",
    "mp_power",
    "newton_directed_line_search",
    "newton_target",
    "nnmf",
    "nonsym_factorize",
    "oracle_min_path_fixed_length",
    "principal_solution",
    "read_matrix_csv",
    "render_edge_list",
    "residual_of_given_factor",
    "restricted_newton_target",
    "shortest_path_matrix",
    "svd",
    "svd_truncate",
    "sym_factorize",
    "tropical_allclose",
    "write_matrix_csv",
]
