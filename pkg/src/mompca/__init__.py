"""Median-of-Means PCA: outlier-robust principal subspaces.

The fit minimizes the median, over ``L`` random blocks of observations, of
the block-mean squared distance to a ``d``-dimensional subspace.  Around it
sit anomaly scoring, video background separation, a synthetic recovery
benchmark and numerical evaluators for the accompanying error bounds.
"""

__version__ = "0.1.0"

from .anomaly import AnomalyResult, anomaly_scores, label_top_fraction
from .bounds import (
    BoundReport,
    deviation_bound,
    empirical_rademacher_complexity,
    rademacher_bound,
    sample_moments,
)
from .core import (
    FitConfig,
    FitReport,
    MompcaModel,
    PartitionPlan,
    block_objective,
    block_objectives,
    fit,
    gradient_step,
    median_block,
    mom_objective,
    partition,
    reconstruct,
    transform,
)
from .errors import (
    AssumptionViolated,
    ConvergenceFailure,
    DimensionMismatch,
    EmptyInlierSet,
    InvalidBlockCount,
    InvalidConfig,
    InvalidData,
    InvalidFraction,
    InvalidInputs,
    InvalidRank,
    LengthMismatch,
    MompcaError,
    NumericalError,
    ParseError,
    RankDeficient,
    ShapeMismatch,
    ValidationError,
)
from .linalg import (
    apply_projector,
    gram_schmidt_orthonormalize,
    orthonormality_error,
    residual_value,
    top_eigenvectors,
)
from .metrics import precision_recall_f1, principal_angles, relative_reconstruction_error, subspace_distance
from .preprocess import center, featurewise_median

__all__ = [
    "AnomalyResult",
    "AssumptionViolated",
    "BoundReport",
    "ConvergenceFailure",
    "DimensionMismatch",
    "EmptyInlierSet",
    "FitConfig",
    "FitReport",
    "InvalidBlockCount",
    "InvalidConfig",
    "InvalidData",
    "InvalidFraction",
    "InvalidInputs",
    "InvalidRank",
    "LengthMismatch",
    "MompcaError",
    "MompcaModel",
    "NumericalError",
    "ParseError",
    "PartitionPlan",
    "RankDeficient",
    "ShapeMismatch",
    "ValidationError",
    "anomaly_scores",
    "apply_projector",
    "block_objective",
    "block_objectives",
    "center",
    "deviation_bound",
    "empirical_rademacher_complexity",
    "featurewise_median",
    "fit",
    "gradient_step",
    "gram_schmidt_orthonormalize",
    "label_top_fraction",
    "median_block",
    "mom_objective",
    "orthonormality_error",
    "partition",
    "precision_recall_f1",
    "principal_angles",
    "rademacher_bound",
    "reconstruct",
    "relative_reconstruction_error",
    "residual_value",
    "sample_moments",
    "subspace_distance",
    "top_eigenvectors",
    "transform",
]
