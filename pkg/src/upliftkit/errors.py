"""Exception hierarchy shared across the package.

Every error carries a short machine-readable ``category`` used by the CLI
to set its exit code and emit a parseable error line.
"""


class UpliftError(Exception):
    """Base class for all upliftkit errors."""

    category = "error"


class ConfigError(UpliftError):
    """Invalid configuration value or malformed config file."""

    category = "config"


class DataError(UpliftError):
    """CSV ingestion, domain violations, or misaligned inputs."""

    category = "data"


class PropensityError(UpliftError):
    """Degenerate treatment assignment or propensity outside (0, 1)."""

    category = "propensity"


class TransformError(UpliftError):
    """Invalid input to a target transform or its inverse."""

    category = "transform"


class CalibrationError(UpliftError):
    """Intercept bisection could not bracket the target rate."""

    category = "calibration"


class ModelError(UpliftError):
    """Learner misuse, schema mismatch, or corrupt model file."""

    category = "model"


class MetricError(UpliftError):
    """Metric undefined for the given inputs (degenerate data)."""

    category = "metric"
