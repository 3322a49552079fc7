"""Outcome-transformation uplift modeling with binary outcomes.

The package turns a randomized two-arm experiment into a supervised
learning problem three different ways (class relabeling, propensity-
weighted outcomes, and their shifted variant), trains a small boosted-tree
learner on the result, and evaluates rankings with qini and uplift curves.
A synthetic generator with known per-row effects and a config-driven CLI
round out the pipeline.
"""

__version__ = "0.1.0"

from .data import (
    ArmStats,
    Dataset,
    FeatureSchema,
    Sample,
    arm_stats,
    load_csv,
    split,
    write_csv,
)
from .errors import (
    CalibrationError,
    ConfigError,
    DataError,
    MetricError,
    ModelError,
    PropensityError,
    TransformError,
    UpliftError,
)
from .gbt import Model, TrainConfig, Tree, fit, load_model, predict, save_model
from .metrics import (
    MetricsReport,
    cumulative_uplift_at_deciles,
    evaluate_scores,
    phi_correlation,
    qini_coefficient,
    qini_curve,
    rank,
    uplift_curve_and_auuc,
)
from .propensity import ConstantPropensity, PerSampleScores, estimate_constant
from .synthgen import GeneratedDataset, SynthConfig, calibrate_intercept, generate
from .transforms import (
    TransformSpec,
    TransformedTable,
    apply,
    class_transform,
    shifted_transformed_outcome,
    transformed_outcome,
    uplift_from_prediction,
)

__all__ = [
    "__version__",
    "ArmStats",
    "CalibrationError",
    "ConfigError",
    "ConstantPropensity",
    "DataError",
    "Dataset",
    "FeatureSchema",
    "GeneratedDataset",
    "MetricError",
    "MetricsReport",
    "Model",
    "ModelError",
    "PerSampleScores",
    "PropensityError",
    "Sample",
    "SynthConfig",
    "TrainConfig",
    "TransformError",
    "TransformSpec",
    "TransformedTable",
    "Tree",
    "UpliftError",
    "apply",
    "arm_stats",
    "calibrate_intercept",
    "class_transform",
    "cumulative_uplift_at_deciles",
    "estimate_constant",
    "evaluate_scores",
    "fit",
    "generate",
    "load_csv",
    "load_model",
    "phi_correlation",
    "predict",
    "qini_coefficient",
    "qini_curve",
    "rank",
    "save_model",
    "shifted_transformed_outcome",
    "split",
    "transformed_outcome",
    "uplift_curve_and_auuc",
    "uplift_from_prediction",
    "write_csv",
]
