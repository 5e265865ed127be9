"""Engagement-sequence popularity prediction via shape/scale decomposition.

A sequence of cumulative view counts is split into a scale (its final
value) and a shape (the sequence divided by that scale).  Shapes are
quantized per sub-period against K-means prototype memories and
predicted by per-period classifiers; the scale is predicted by a single
regressor on a log-log-normalized target.  Recomposition multiplies the
concatenated prototypes by the denormalized scale.
"""

from .clustering import (
    ElbowCurve,
    KMeansResult,
    ShapeMemory,
    assign_nearest,
    build_memory,
    elbow_scan,
    kmeans,
    lookup,
)
from .datasets import Dataset, SynthParams, load_csv, skewness, synth_generate, write_csv
from .evaluation import (
    AblationTable,
    EvalReport,
    baseline_metrics,
    kfold_split,
    per_sample_error,
    per_sample_errors,
    run_ablation,
    run_protocol,
    truncated_aggregate,
)
from .features import FEATURE_NAMES, PostRecord, engineer, engineer_many
from .framework import FrameworkConfig, TrainedFramework, fit, split_periods
from .models import (
    ForestClassifier,
    ForestRegressor,
    ModelParams,
    RidgeClassifier,
    RidgeRegressor,
)
from .sequences import (
    DEFAULT_HORIZON,
    EngagementSequence,
    NormScheme,
    ScaleValue,
    ShapeVector,
    decompose,
    decompose_matrix,
    denormalize_scale,
    normalize_scale,
    recompose,
)

__version__ = "0.1.0"

__all__ = [
    "AblationTable",
    "Dataset",
    "DEFAULT_HORIZON",
    "ElbowCurve",
    "EngagementSequence",
    "EvalReport",
    "FEATURE_NAMES",
    "ForestClassifier",
    "ForestRegressor",
    "FrameworkConfig",
    "KMeansResult",
    "ModelParams",
    "NormScheme",
    "PostRecord",
    "RidgeClassifier",
    "RidgeRegressor",
    "ScaleValue",
    "ShapeMemory",
    "ShapeVector",
    "SynthParams",
    "TrainedFramework",
    "assign_nearest",
    "baseline_metrics",
    "build_memory",
    "decompose",
    "decompose_matrix",
    "denormalize_scale",
    "elbow_scan",
    "engineer",
    "engineer_many",
    "fit",
    "kfold_split",
    "kmeans",
    "load_csv",
    "lookup",
    "normalize_scale",
    "per_sample_error",
    "per_sample_errors",
    "recompose",
    "run_ablation",
    "run_protocol",
    "skewness",
    "split_periods",
    "synth_generate",
    "truncated_aggregate",
    "write_csv",
]
