"""Outcome transforms that turn a two-arm binary experiment into one
regression or classification target per row.

Three transforms are supported. ``class`` relabels a row positive when
treatment and outcome agree, so twice the positive-class probability minus
one estimates uplift. ``transformed`` is the inverse-propensity-weighted
outcome ``y * (w - p) / (p * (1 - p))``, whose conditional expectation is
the uplift itself. ``shifted`` subtracts a constant from the outcome before
weighting, ``(y - shift) * (w - p) / (p * (1 - p))``, which leaves the
expectation unchanged for any shift in [0, 1] but rescales the variance;
the variance-minimizing shift equals the response rate, so that is the
default when no shift is given.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import Dataset
from .errors import TransformError
from .propensity import PropensityModel, propensity_for

KINDS = ("class", "transformed", "shifted")


@dataclass(frozen=True)
class TransformSpec:
    """Which transform to apply and, for ``shifted``, with what constant.

    Args:
        kind: One of ``class``, ``transformed``, ``shifted``.
        shift: Constant in [0, 1] subtracted from the outcome. Only valid
            for ``shifted``; ``None`` means use the training response rate,
            resolved when the transform is applied.
    """

    kind: str
    shift: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise TransformError(
                f"unknown transform {self.kind!r}, expected one of {KINDS}"
            )
        if self.shift is not None:
            if self.kind != "shifted":
                raise TransformError(f"{self.kind} transform takes no shift")
            if not 0.0 <= self.shift <= 1.0:
                raise TransformError(f"shift must be in [0, 1], got {self.shift}")
            if self.shift in (0.0, 1.0):
                warnings.warn(
                    f"shift={self.shift} sits on the boundary of [0, 1]; "
                    "0 reproduces the unshifted transformed outcome",
                    stacklevel=2,
                )


@dataclass(frozen=True)
class TransformedTable:
    """Per-row targets produced by a transform.

    ``shift`` records the constant actually used: ``None`` for ``class``,
    0.0 for ``transformed``, and the resolved value for ``shifted``.
    ``propensity`` is empty for ``class``, which ignores assignment odds.
    """

    kind: str
    shift: float | None
    targets: np.ndarray
    propensity: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.targets, self.propensity):
            arr.setflags(write=False)

    @property
    def task_kind(self) -> str:
        """``classification`` for binary class targets, else ``regression``."""
        return "classification" if self.kind == "class" else "regression"


def class_transform(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Binary target that is 1 exactly when ``w == y``."""
    y = np.asarray(y)
    w = np.asarray(w)
    return (w == y).astype(np.float64)


def shifted_transformed_outcome(
    y: np.ndarray,
    w: np.ndarray,
    p: np.ndarray,
    shift: float,
) -> np.ndarray:
    """Shifted transformed outcome ``(y - shift) * (w - p) / (p * (1 - p))``.

    Args:
        y: Binary outcomes.
        w: Binary treatment flags.
        p: Propensity scores in (0, 1), broadcastable against ``y``.
        shift: Constant in [0, 1].

    Returns:
        Float targets of the broadcast shape.
    """
    if not 0.0 <= shift <= 1.0:
        raise TransformError(f"shift must be in [0, 1], got {shift}")
    y = np.asarray(y, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    return (y - shift) * (w - p) / (p * (1.0 - p))


def transformed_outcome(y: np.ndarray, w: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Transformed outcome ``y * (w - p) / (p * (1 - p))``.

    Identical to :func:`shifted_transformed_outcome` with shift 0, and
    implemented that way so the two agree bit for bit.
    """
    return shifted_transformed_outcome(y, w, p, 0.0)


def apply(
    spec: TransformSpec,
    ds: Dataset,
    model: PropensityModel | None = None,
) -> TransformedTable:
    """Materialize per-row targets for a dataset.

    Args:
        spec: Transform to apply.
        ds: Source rows.
        model: Propensity model; required for ``transformed`` and
            ``shifted``, ignored for ``class``.

    Returns:
        Targets plus the propensity and shift actually used.

    Raises:
        TransformError: If a propensity-weighted transform is requested
            without a propensity model.
    """
    if spec.kind == "class":
        return TransformedTable(
            kind="class",
            shift=None,
            targets=class_transform(ds.y, ds.w),
            propensity=np.empty(0),
        )
    if model is None:
        raise TransformError(f"{spec.kind} transform needs a propensity model")
    p = propensity_for(model, ds)
    if spec.kind == "transformed":
        shift = 0.0
    elif spec.shift is not None:
        shift = spec.shift
    else:
        if len(ds) == 0:
            raise TransformError(
                "default shift is the response rate, undefined on an empty dataset"
            )
        shift = float(ds.y.mean())
    return TransformedTable(
        kind=spec.kind,
        shift=shift,
        targets=shifted_transformed_outcome(ds.y, ds.w, p, shift),
        propensity=p,
    )


def write_table_csv(ds: Dataset, table: TransformedTable, path: str | Path) -> None:
    """Write features plus transformed targets as CSV for external learners.

    Columns are the dataset's feature names followed by ``target``, one row
    per sample in dataset order.

    Raises:
        TransformError: If the table was not built from this dataset.
    """
    if table.targets.shape != (len(ds),):
        raise TransformError(
            f"table has {table.targets.shape[0]} targets for {len(ds)} rows"
        )
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ds.schema.names) + ["target"])
        for i in range(len(ds)):
            row = [str(float(v)) for v in ds.x[i]]
            row.append(str(float(table.targets[i])))
            writer.writerow(row)


def uplift_from_prediction(kind: str, raw: np.ndarray) -> np.ndarray:
    """Map a model's raw prediction to an uplift estimate.

    For ``class`` the raw value is a positive-class probability and the
    uplift is ``2 * raw - 1``; the weighted transforms regress on uplift
    directly, so raw predictions pass through untouched.

    Raises:
        TransformError: On an unknown kind, or a ``class`` prediction
            outside [0, 1].
    """
    if kind not in KINDS:
        raise TransformError(
            f"unknown transform {kind!r}, expected one of {KINDS}"
        )
    raw = np.asarray(raw, dtype=np.float64)
    if kind == "class":
        if raw.size and (raw.min() < 0.0 or raw.max() > 1.0):
            raise TransformError(
                "class-transform predictions must be probabilities in [0, 1]"
            )
        return 2.0 * raw - 1.0
    return raw.copy()
