"""PageRank by lumping all dangling nodes into a single state, plus a dense
verification lab for the matrix identities the method rests on."""

from .decomposition import (
    LduFactors,
    ldu_factors,
    stochastic_complement,
    verify_coupled_stationarity,
)
from .graph import (
    EdgeListParseError,
    HyperlinkMatrix,
    PageRankParams,
    WebGraph,
    build_hyperlink_matrix,
    load_weight_vector,
    parse_edge_list,
    probability_vector,
    uniform_vector,
)
from .lumping import (
    BlockStructure,
    DanglingPartition,
    SolveReport,
    detect_dangling,
    full_apply,
    full_operator,
    lumped_apply,
    permute_blocks,
    power_method,
    recover_pagerank,
    solve_lumped,
    unpermute,
)
from .transforms import (
    CheckReport,
    TransformKind,
    build_dense_google,
    build_dense_lumped,
    build_transform,
    check_lumpable,
    check_spectrum_identity,
    similarity_transform,
    stationary_dense,
    verify_transform_condition,
)

__version__ = "0.1.0"

__all__ = [
    "BlockStructure",
    "CheckReport",
    "DanglingPartition",
    "EdgeListParseError",
    "HyperlinkMatrix",
    "LduFactors",
    "PageRankParams",
    "SolveReport",
    "TransformKind",
    "WebGraph",
    "build_dense_google",
    "build_dense_lumped",
    "build_hyperlink_matrix",
    "build_transform",
    "check_lumpable",
    "check_spectrum_identity",
    "detect_dangling",
    "full_apply",
    "full_operator",
    "ldu_factors",
    "load_weight_vector",
    "lumped_apply",
    "parse_edge_list",
    "permute_blocks",
    "power_method",
    "probability_vector",
    "recover_pagerank",
    "similarity_transform",
    "solve_lumped",
    "stationary_dense",
    "stochastic_complement",
    "uniform_vector",
    "unpermute",
    "verify_coupled_stationarity",
    "verify_transform_condition",
]
