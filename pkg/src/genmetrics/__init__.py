"""Sample-based evaluation metrics for generative models.

The package turns pairs of point sets (real samples vs model samples,
both living in some feature space) into scalar quality scores, and ships
the synthetic diagnostic protocols used to compare how those scores react
to known distortions: mode collapse, mode drop, mixing, image transforms,
shrinking sample budgets, and train-set memorization.
"""

from genmetrics.errors import (
    ConfigError,
    DimensionError,
    DomainError,
    FormatError,
    GenMetricsError,
    InsufficientSamplesError,
    SolverFailureError,
    TruncationError,
    UnsupportedError,
    ValidationError,
)
from genmetrics.featureset import (
    SPACE_TAGS,
    DistanceMatrix,
    FeatureSet,
    load_feature_file,
    mix_sets,
    pairwise_distances,
    seeded_split,
    write_feature_file,
)
from genmetrics.metrics import (
    GaussianFit,
    KernelConfig,
    MetricReport,
    fid,
    fit_gaussian,
    inception_score,
    median_heuristic_bandwidth,
    mmd,
    mode_score,
    relative_inverse_score,
)
from genmetrics.nn_test import NnAccuracy, one_nn_accuracy
from genmetrics.rng import SeededRng
from genmetrics.transport import TransportPlan, brute_force_emd, emd

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "DomainError",
    "DistanceMatrix",
    "FeatureSet",
    "FormatError",
    "GaussianFit",
    "GenMetricsError",
    "InsufficientSamplesError",
    "KernelConfig",
    "MetricReport",
    "NnAccuracy",
    "SPACE_TAGS",
    "SeededRng",
    "SolverFailureError",
    "TransportPlan",
    "TruncationError",
    "UnsupportedError",
    "ValidationError",
    "brute_force_emd",
    "emd",
    "fid",
    "fit_gaussian",
    "inception_score",
    "load_feature_file",
    "median_heuristic_bandwidth",
    "mix_sets",
    "mmd",
    "mode_score",
    "one_nn_accuracy",
    "pairwise_distances",
    "relative_inverse_score",
    "seeded_split",
    "write_feature_file",
    "__version__",
]
