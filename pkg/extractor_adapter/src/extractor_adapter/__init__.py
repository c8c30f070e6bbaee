"""Image-directory -> FSET feature extraction with pretrained classifiers."""

from .errors import (
    AdapterError,
    ConfigError,
    EmptyInputError,
    InputError,
    WeightsError,
)
from .extract import ExtractionResult, ExtractorConfig, manifest_path_for, run_extraction
from .fset import read_fset, write_fset
from .model import (
    CONV_DIMS,
    FALLBACK_WEIGHTS_SEED,
    MODE_NAMES,
    MODEL_NAMES,
    SOFTMAX_DIM,
    WEIGHTS_POLICIES,
    build_extractor,
    preprocessing,
)

__version__ = "0.1.0"

__all__ = [
    "AdapterError",
    "ConfigError",
    "EmptyInputError",
    "InputError",
    "WeightsError",
    "ExtractionResult",
    "ExtractorConfig",
    "manifest_path_for",
    "run_extraction",
    "read_fset",
    "write_fset",
    "CONV_DIMS",
    "FALLBACK_WEIGHTS_SEED",
    "MODE_NAMES",
    "MODEL_NAMES",
    "SOFTMAX_DIM",
    "WEIGHTS_POLICIES",
    "build_extractor",
    "preprocessing",
    "__version__",
]
