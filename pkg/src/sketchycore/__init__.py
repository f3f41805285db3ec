"""Near-optimal rank-r SVD from sketches of subsampled rows and columns."""

from .baselines import METHODS as BASELINE_METHODS
from .baselines import baseline_approx
from .io import MatrixFormatError, load_matrix, save_matrix
from .matcore import IndexSet, InvalidArgumentError, RandomStream
from .sketch import (
    ApproxFactors,
    CoreSketch,
    RankRFactors,
    SketchConfig,
    Timing,
    build_core_sketches,
    build_full_sketches,
    recover,
    sketchy_core_svd,
    sketchy_svd,
    truncate,
)
from .synth import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "ApproxFactors",
    "BASELINE_METHODS",
    "CoreSketch",
    "IndexSet",
    "InvalidArgumentError",
    "MatrixFormatError",
    "RandomStream",
    "RankRFactors",
    "SketchConfig",
    "SynthSpec",
    "Timing",
    "baseline_approx",
    "build_core_sketches",
    "build_full_sketches",
    "generate",
    "load_matrix",
    "recover",
    "save_matrix",
    "sketchy_core_svd",
    "sketchy_svd",
    "truncate",
]
