"""Binary-outcome experiment data: container, CSV round-trip, stratified split.

A dataset is a feature matrix plus two binary columns: treatment assignment
``w`` and observed outcome ``y``. Arrays are stored read-only so downstream
code can share them without defensive copies. Row order is meaningful, and
the row index is the tie-breaker every downstream ranking falls back on.
"""

from __future__ import annotations

import csv
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

# Fixed iteration order over the four (w, y) cells; splits depend on it.
_CELLS = ((0, 0), (0, 1), (1, 0), (1, 1))


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature names; column order is the model's feature order.

    Args:
        names: One name per feature column, unique and non-empty.
    """

    names: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.names) == 0:
            raise DataError("schema needs at least one feature")
        if any(not n for n in self.names):
            raise DataError("feature names must be non-empty")
        if len(set(self.names)) != len(self.names):
            raise DataError("feature names must be unique")

    @property
    def n_features(self) -> int:
        return len(self.names)

    def index_of(self, name: str) -> int:
        """Position of ``name`` in the feature order."""
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown feature {name!r}") from None


@dataclass(frozen=True)
class Sample:
    """One row: feature vector, treatment flag, outcome flag."""

    x: np.ndarray
    w: int
    y: int


@dataclass(frozen=True)
class Dataset:
    """Immutable experiment table. Zero rows is legal; zero features is not.

    Args:
        schema: Feature names, one per column of ``x``.
        x: Feature matrix, shape (n, d), finite floats.
        w: Treatment indicator per row, values in {0, 1}.
        y: Outcome indicator per row, values in {0, 1}.
    """

    schema: FeatureSchema
    x: np.ndarray
    w: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        x = np.ascontiguousarray(self.x, dtype=np.float64)
        w = np.asarray(self.w)
        y = np.asarray(self.y)
        if x.ndim != 2:
            raise DataError(f"x must be 2-d, got shape {x.shape}")
        n = x.shape[0]
        if x.shape[1] != self.schema.n_features:
            raise DataError(
                f"x has {x.shape[1]} columns, schema names {self.schema.n_features}"
            )
        if not np.all(np.isfinite(x)):
            raise DataError("features must be finite")
        for label, col in (("w", w), ("y", y)):
            if col.shape != (n,):
                raise DataError(f"{label} must have shape ({n},), got {col.shape}")
            if not np.isin(col, (0, 1)).all():
                raise DataError(f"{label} values must be 0 or 1")
        w = w.astype(np.int8)
        y = y.astype(np.int8)
        for arr in (x, w, y):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "y", y)

    def __len__(self) -> int:
        return self.x.shape[0]

    def sample(self, i: int) -> Sample:
        """Row ``i`` as a :class:`Sample` (negative indices allowed)."""
        return Sample(x=self.x[i], w=int(self.w[i]), y=int(self.y[i]))

    def subset(self, indices: np.ndarray) -> "Dataset":
        """New dataset holding the given rows, in the given order."""
        idx = np.asarray(indices, dtype=np.int64)
        if idx.ndim != 1:
            raise DataError("subset needs a 1-d index array")
        return Dataset(self.schema, self.x[idx], self.w[idx], self.y[idx])


@dataclass(frozen=True)
class ArmStats:
    """Per-arm counts with derived response rates.

    A dataset may hold a single arm; the absent arm's rate is ``None``
    rather than a number, and so is the rate difference.
    """

    n_control: int
    n_treated: int
    positives_control: int
    positives_treated: int

    @property
    def n_total(self) -> int:
        return self.n_control + self.n_treated

    @property
    def rate_control(self) -> float | None:
        if self.n_control == 0:
            return None
        return self.positives_control / self.n_control

    @property
    def rate_treated(self) -> float | None:
        if self.n_treated == 0:
            return None
        return self.positives_treated / self.n_treated

    @property
    def rate_difference(self) -> float | None:
        """Treated minus control response rate, when both arms exist."""
        if self.n_control == 0 or self.n_treated == 0:
            return None
        return self.rate_treated - self.rate_control

    @property
    def treated_fraction(self) -> float:
        return self.n_treated / self.n_total


def arm_stats(ds: Dataset) -> ArmStats:
    """Counts and response rates per treatment arm.

    Raises:
        DataError: If the dataset has no rows.
    """
    if len(ds) == 0:
        raise DataError("arm statistics need at least one row")
    treated = ds.w == 1
    n_t = int(treated.sum())
    return ArmStats(
        n_control=len(ds) - n_t,
        n_treated=n_t,
        positives_control=int(ds.y[~treated].sum()),
        positives_treated=int(ds.y[treated].sum()),
    )


def content_digest(ds: Dataset) -> str:
    """SHA-256 over schema and row contents; equal data, equal digest."""
    h = hashlib.sha256()
    h.update(",".join(ds.schema.names).encode())
    h.update(ds.x.tobytes())
    h.update(ds.w.tobytes())
    h.update(ds.y.tobytes())
    return h.hexdigest()


def load_csv(
    path: str | Path,
    treatment_col: str = "w",
    outcome_col: str = "y",
    drop_cols: tuple[str, ...] = (),
) -> Dataset:
    """Read a dataset from a delimited file.

    The file must have a header row. Every column other than
    ``treatment_col``, ``outcome_col``, and ``drop_cols`` is taken as a
    feature, in file order. A header-only file yields an empty dataset.

    Args:
        path: File to read.
        treatment_col: Header name of the treatment column.
        outcome_col: Header name of the outcome column.
        drop_cols: Columns to ignore entirely (for example a per-row
            propensity column read separately via :func:`read_column`).

    Returns:
        The parsed dataset.

    Raises:
        DataError: On a missing column, non-numeric cell, or a treatment or
            outcome value other than 0 or 1. Messages carry the 1-based row
            number of the offending line.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        if treatment_col == outcome_col:
            raise DataError("treatment and outcome columns must differ")
        for col in (treatment_col, outcome_col, *drop_cols):
            if col not in header:
                raise DataError(f"{path} has no column {col!r}")
        skip = {header.index(c) for c in (treatment_col, outcome_col, *drop_cols)}
        w_pos = header.index(treatment_col)
        y_pos = header.index(outcome_col)
        feat_pos = [i for i in range(len(header)) if i not in skip]
        if not feat_pos:
            raise DataError(f"{path} has no feature columns")
        schema = FeatureSchema(tuple(header[i] for i in feat_pos))

        xs: list[list[float]] = []
        ws: list[int] = []
        ys: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                xs.append([float(row[i]) for i in feat_pos])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric feature value") from None
            ws.append(_parse_flag(row[w_pos], treatment_col, path, lineno))
            ys.append(_parse_flag(row[y_pos], outcome_col, path, lineno))
    return Dataset(
        schema,
        np.asarray(xs, dtype=np.float64).reshape(len(xs), len(feat_pos)),
        np.asarray(ws, dtype=np.int8),
        np.asarray(ys, dtype=np.int8),
    )


def read_column(path: str | Path, column: str) -> np.ndarray:
    """One numeric CSV column as a float array, in file order.

    Raises:
        DataError: If the column is missing or holds a non-numeric value.
    """
    path = Path(path)
    try:
        fh = path.open(newline="")
    except OSError as exc:
        raise DataError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        if column not in header:
            raise DataError(f"{path} has no column {column!r}")
        pos = header.index(column)
        out: list[float] = []
        for lineno, row in enumerate(reader, start=2):
            if pos >= len(row):
                raise DataError(f"{path}:{lineno}: short row")
            try:
                out.append(float(row[pos]))
            except ValueError:
                raise DataError(
                    f"{path}:{lineno}: non-numeric {column} value {row[pos]!r}"
                ) from None
    return np.asarray(out, dtype=np.float64)


def _parse_flag(text: str, col: str, path: Path, lineno: int) -> int:
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{path}:{lineno}: non-numeric {col} value {text!r}") from None
    if value not in (0.0, 1.0):
        raise DataError(f"{path}:{lineno}: {col} must be 0 or 1, got {text!r}")
    return int(value)


def write_csv(
    ds: Dataset,
    path: str | Path,
    treatment_col: str = "w",
    outcome_col: str = "y",
) -> None:
    """Write a dataset in the layout :func:`load_csv` reads back.

    Feature columns come first in schema order, then the treatment and
    outcome columns. Floats use shortest round-trip formatting.
    """
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(ds.schema.names) + [treatment_col, outcome_col])
        for i in range(len(ds)):
            row = [str(float(v)) for v in ds.x[i]]
            row.append(str(int(ds.w[i])))
            row.append(str(int(ds.y[i])))
            writer.writerow(row)


def split_indices(
    w: np.ndarray,
    y: np.ndarray,
    test_fraction: float,
    seed: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Row indices of a stratified train/test split.

    Stratification is joint over (w, y): each non-empty cell contributes
    ``round(cell_size * test_fraction)`` rows to the test side, so arm
    sizes and response rates survive the split as closely as rounding
    allows. Both returned index arrays ascend, preserving row order.

    Args:
        w: Binary treatment flags.
        y: Binary outcomes, same length.
        test_fraction: Fraction routed to the test side, in (0, 1).
        seed: Seeds the shuffle; equal seeds give equal splits.

    Returns:
        ``(train_idx, test_idx)``, a disjoint cover of ``range(n)``.

    Raises:
        DataError: If the fraction is out of range or either side ends
            up empty.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError(f"test_fraction must be in (0, 1), got {test_fraction}")
    w = np.asarray(w)
    y = np.asarray(y)
    n = w.shape[0]
    if n == 0:
        raise DataError("cannot split an empty dataset")
    rng = np.random.default_rng(seed)
    test_parts: list[np.ndarray] = []
    for w_val, y_val in _CELLS:
        cell = np.flatnonzero((w == w_val) & (y == y_val))
        k = round(cell.size * test_fraction)
        if k > 0:
            test_parts.append(rng.permutation(cell)[:k])
    test_idx = (
        np.sort(np.concatenate(test_parts))
        if test_parts
        else np.empty(0, dtype=np.int64)
    )
    if test_idx.size == 0 or test_idx.size == n:
        raise DataError(
            f"test_fraction={test_fraction} leaves an empty part for n={n}"
        )
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    return np.flatnonzero(~mask), test_idx


def split(
    ds: Dataset,
    test_fraction: float,
    seed: int,
) -> tuple[Dataset, Dataset]:
    """Stratified train/test split of a dataset; see :func:`split_indices`.

    Returns:
        ``(train, test)`` datasets sharing the input schema.
    """
    train_idx, test_idx = split_indices(ds.w, ds.y, test_fraction, seed)
    return ds.subset(train_idx), ds.subset(test_idx)
