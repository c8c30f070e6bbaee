"""Evaluation-protocol layer: synthetic data, failure simulators, sweeps."""

from genmetrics.experiments.clustering import (
    KMeansResult,
    kmeans,
    simulate_mode_collapse,
    simulate_mode_drop,
)
from genmetrics.experiments.sweeps import (
    METRIC_NAMES,
    PROTOCOLS,
    ExperimentCurve,
    FeatureFileSource,
    GaussianMixtureSource,
    MetricSeries,
    SweepConfig,
    aggregate_curve,
    default_grid,
    run_seed,
    run_sweep,
    validate_protocol_config,
)
from genmetrics.experiments.synthetic import (
    BLOB_MARGIN,
    HISTOGRAM_BINS,
    ToyImage,
    generate_gaussian_mixture,
    generate_toy_images,
    toy_feature_map,
    transform_images,
)

__all__ = [
    "BLOB_MARGIN",
    "HISTOGRAM_BINS",
    "METRIC_NAMES",
    "PROTOCOLS",
    "ExperimentCurve",
    "FeatureFileSource",
    "GaussianMixtureSource",
    "KMeansResult",
    "MetricSeries",
    "SweepConfig",
    "ToyImage",
    "aggregate_curve",
    "default_grid",
    "generate_gaussian_mixture",
    "generate_toy_images",
    "kmeans",
    "run_seed",
    "run_sweep",
    "simulate_mode_collapse",
    "simulate_mode_drop",
    "toy_feature_map",
    "transform_images",
    "validate_protocol_config",
]
