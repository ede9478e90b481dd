"""Ordinal embedding: unfolding and ordinal MDS from rank data, with an
identifiability harness."""

__version__ = "0.1.0"

from .geometry import (
    AlignmentResult,
    Configuration,
    DegenerateConfigurationError,
    DimensionMismatchError,
    GaugePair,
    Side,
    SimilarityTransform,
    SphericalConfiguration,
    apply_similarity,
    bisector_side,
    chord_sq,
    gauge_align_vector_model,
    halfspace,
    orthogonal_align,
    similarity_procrustes,
)
from .rankings import (
    Model,
    RankMatrix,
    RankValidationError,
    TieError,
    TripleSet,
    mds_row_ranks,
    rank_data_equal,
    row_ranks,
    row_ranks_point,
    row_ranks_vector,
    triples_from_ranks,
    violation_count,
)
from .solvers import (
    DegenerateSolutionError,
    InfeasibleError,
    NonConvergedError,
    SolveResult,
    SolverError,
    SolverOptions,
    solve_external_point,
    solve_external_vector,
    solve_internal_point,
    solve_internal_vector,
    solve_ordinal_mds,
    solve_sphere_mds,
)
