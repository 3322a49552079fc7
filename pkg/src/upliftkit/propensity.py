"""Treatment propensity models.

Randomized experiments use a single constant score (the treated fraction);
observational data can supply one score per row. Either form answers the
same question: per-row probability of assignment to the treatment arm.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .errors import PropensityError

# Scores are clamped into [EPS, 1 - EPS] to keep the transform weights
# 1/p and 1/(1-p) finite.
EPS = 1e-6


@dataclass(frozen=True)
class ConstantPropensity:
    """One assignment probability shared by every row."""

    p: float

    def __post_init__(self) -> None:
        if not 0.0 < self.p < 1.0:
            raise PropensityError(f"propensity must be in (0, 1), got {self.p}")


@dataclass(frozen=True)
class PerSampleScores:
    """Individual assignment probabilities, one per row.

    Args:
        scores: Array of shape (n,); values outside ``(0, 1)`` are rejected,
            values within ``EPS`` of the boundary are clamped on use.
    """

    scores: np.ndarray

    def __post_init__(self) -> None:
        s = np.asarray(self.scores, dtype=np.float64)
        if s.ndim != 1 or s.size == 0:
            raise PropensityError("scores must be a non-empty 1-d array")
        if not np.all(np.isfinite(s)):
            raise PropensityError("scores must be finite")
        if np.any(s <= 0.0) or np.any(s >= 1.0):
            raise PropensityError("scores must lie strictly inside (0, 1)")
        s = s.copy()
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)


PropensityModel = ConstantPropensity | PerSampleScores


def estimate_constant(ds: Dataset) -> ConstantPropensity:
    """Treated fraction of the dataset as a constant propensity.

    Raises:
        PropensityError: If every row landed in the same arm.
    """
    n_treated = int((ds.w == 1).sum())
    if n_treated == 0 or n_treated == len(ds):
        raise PropensityError(
            "treatment assignment is degenerate: one arm is empty"
        )
    return ConstantPropensity(n_treated / len(ds))


def propensity_for(model: PropensityModel, ds: Dataset) -> np.ndarray:
    """Per-row propensity scores aligned with ``ds``.

    Scores are clamped into ``[EPS, 1 - EPS]``; clamping emits a warning
    since it signals near-deterministic assignment.

    Args:
        model: Constant or per-sample propensity.
        ds: Dataset the scores must align with.

    Returns:
        Read-only float array of shape (len(ds),).

    Raises:
        PropensityError: If per-sample scores do not match the dataset length.
    """
    if isinstance(model, ConstantPropensity):
        scores = np.full(len(ds), model.p)
    else:
        if model.scores.shape[0] != len(ds):
            raise PropensityError(
                f"{model.scores.shape[0]} scores for {len(ds)} rows"
            )
        scores = model.scores.copy()
    clipped = np.clip(scores, EPS, 1.0 - EPS)
    if not np.array_equal(clipped, scores):
        warnings.warn(
            f"propensity scores clamped into [{EPS}, {1.0 - EPS}]",
            stacklevel=2,
        )
    clipped.setflags(write=False)
    return clipped
