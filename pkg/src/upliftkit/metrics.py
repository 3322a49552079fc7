"""Ranking metrics for uplift scores: qini and uplift curves, their areas,
and the phi correlation used to compare binary target columns.

Conventions shared by every curve here:

* Rows are ranked by score, descending; ties keep ascending row order.
* The curve is evaluated at fractions ``k / n_bins`` for ``k = 0..n_bins``,
  with the prefix at fraction ``k / n_bins`` holding the first
  ``(k * n) // n_bins`` ranked rows.
* A prefix in which a needed arm is empty repeats the previous value
  (0 at the origin), so curves stay defined on tiny or lopsided prefixes.
* Areas are trapezoidal over the fraction grid.

Within a prefix holding ``n_t`` treated rows (``n_t1`` of them positive)
and ``n_c`` control rows (``n_c1`` positive), the qini curve is
``n_t1 - n_c1 * n_t / n_c`` and the uplift curve is
``n_t1 / n_t - n_c1 / n_c``. The qini coefficient rescales the area under
the qini curve so random ranking scores 0 and the best achievable ranking
scores 1; the area under the uplift curve (AUUC) is reported unscaled.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import MetricError

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass(frozen=True)
class MetricsReport:
    """Scalar metrics plus the curves they were read off.

    ``fractions`` is the shared grid for ``qini_values`` and
    ``uplift_values``; ``uplift_at_deciles`` holds the prefix uplift at
    fractions 0.1 through 1.0.
    """

    qini_coefficient: float
    auuc: float
    uplift_at_deciles: np.ndarray
    fractions: np.ndarray
    qini_values: np.ndarray
    uplift_values: np.ndarray

    def __post_init__(self) -> None:
        for arr in (
            self.uplift_at_deciles,
            self.fractions,
            self.qini_values,
            self.uplift_values,
        ):
            arr.setflags(write=False)


def rank(scores: np.ndarray) -> np.ndarray:
    """Row indices ordered by descending score, ties by ascending index."""
    s = np.asarray(scores, dtype=np.float64)
    if s.ndim != 1 or s.size == 0:
        raise MetricError("scores must be a non-empty 1-d array")
    if not np.all(np.isfinite(s)):
        raise MetricError("scores must be finite")
    return np.argsort(-s, kind="stable")


def phi_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two binary vectors via the 2x2 table.

    Args:
        a: First vector, values in {0, 1}.
        b: Second vector, same length.

    Returns:
        ``(n11 * n00 - n10 * n01) / sqrt(r1 * r0 * c1 * c0)`` where ``nij``
        counts rows with ``a == i`` and ``b == j`` and the denominator
        multiplies the table margins.

    Raises:
        MetricError: If either vector is constant (a margin is zero).
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 1 or a.shape != b.shape or a.size == 0:
        raise MetricError("inputs must be non-empty 1-d arrays of equal length")
    for label, v in (("a", a), ("b", b)):
        if not np.isin(v, (0, 1)).all():
            raise MetricError(f"{label} values must be 0 or 1")
    a1 = a == 1
    b1 = b == 1
    n11 = float(np.sum(a1 & b1))
    n10 = float(np.sum(a1 & ~b1))
    n01 = float(np.sum(~a1 & b1))
    n00 = float(np.sum(~a1 & ~b1))
    r1, r0 = n11 + n10, n01 + n00
    c1, c0 = n11 + n01, n10 + n00
    if min(r1, r0, c1, c0) == 0.0:
        raise MetricError("phi undefined: one of the vectors is constant")
    return (n11 * n00 - n10 * n01) / math.sqrt(r1 * r0 * c1 * c0)


def qini_curve(
    scores: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    n_bins: int = 100,
) -> tuple[np.ndarray, np.ndarray]:
    """Qini curve of a score ranking.

    Returns:
        ``(fractions, values)`` arrays of length ``n_bins + 1``.
    """
    s, y, w = _validate(scores, y, w)
    return _curve(rank(s), y, w, _check_bins(n_bins), "qini")


def qini_coefficient(
    scores: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    n_bins: int = 100,
) -> float:
    """Area under the qini curve, normalized against random and optimal.

    The random baseline is the straight line from the origin to the
    curve's endpoint; the optimal curve ranks treated positives first,
    control negatives second, treated negatives third, control positives
    last. The coefficient is ``(area - random) / (optimal - random)``.

    Raises:
        MetricError: If the optimal area equals the random baseline, which
            makes the normalization undefined.
    """
    s, y, w = _validate(scores, y, w)
    return _qini_coefficient(rank(s), y, w, _check_bins(n_bins))


def uplift_curve_and_auuc(
    scores: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    n_bins: int = 100,
) -> tuple[np.ndarray, np.ndarray, float]:
    """Uplift curve of a score ranking plus its trapezoidal area.

    Returns:
        ``(fractions, values, auuc)``.
    """
    s, y, w = _validate(scores, y, w)
    fractions, values = _curve(rank(s), y, w, _check_bins(n_bins), "uplift")
    return fractions, values, float(_trapezoid(values, fractions))


def cumulative_uplift_at_deciles(
    scores: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
) -> np.ndarray:
    """Prefix uplift at fractions 0.1, 0.2, ..., 1.0 of the ranking."""
    s, y, w = _validate(scores, y, w)
    return _curve(rank(s), y, w, 10, "uplift")[1][1:]


def evaluate_scores(
    scores: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    n_bins: int = 100,
) -> MetricsReport:
    """Full metric bundle for one score vector.

    Args:
        scores: Uplift scores, higher means ranked earlier.
        y: Binary outcomes.
        w: Binary treatment flags.
        n_bins: Curve resolution.

    Returns:
        Qini coefficient, AUUC, decile uplifts, and both curves on the
        shared fraction grid.
    """
    s, y, w = _validate(scores, y, w)
    n_bins = _check_bins(n_bins)
    order = rank(s)
    fractions, qini_values = _curve(order, y, w, n_bins, "qini")
    _, uplift_values = _curve(order, y, w, n_bins, "uplift")
    return MetricsReport(
        qini_coefficient=_qini_coefficient(order, y, w, n_bins),
        auuc=float(_trapezoid(uplift_values, fractions)),
        uplift_at_deciles=_curve(order, y, w, 10, "uplift")[1][1:],
        fractions=fractions,
        qini_values=qini_values,
        uplift_values=uplift_values,
    )


def write_curves_csv(report: MetricsReport, path: str | Path) -> None:
    """Write both curves as ``fraction,value,series`` rows.

    Series names are ``qini`` and ``uplift``; within a series the rows
    ascend by fraction. Floats use shortest round-trip formatting.
    """
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fraction", "value", "series"])
        for series, values in (
            ("qini", report.qini_values),
            ("uplift", report.uplift_values),
        ):
            for f, v in zip(report.fractions, values):
                writer.writerow([str(float(f)), str(float(v)), series])


def _check_bins(n_bins: int) -> int:
    if not isinstance(n_bins, (int, np.integer)) or n_bins < 1:
        raise MetricError(f"n_bins must be a positive integer, got {n_bins!r}")
    return int(n_bins)


def _validate(
    scores: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    w = np.asarray(w)
    if s.ndim != 1 or s.size == 0:
        raise MetricError("scores must be a non-empty 1-d array")
    if y.shape != s.shape or w.shape != s.shape:
        raise MetricError("scores, y, and w must have equal length")
    if not np.all(np.isfinite(s)):
        raise MetricError("scores must be finite")
    for label, v in (("y", y), ("w", w)):
        if not np.isin(v, (0, 1)).all():
            raise MetricError(f"{label} values must be 0 or 1")
    n_treated = int((w == 1).sum())
    if n_treated == 0 or n_treated == s.size:
        raise MetricError("both treatment arms must be non-empty")
    return s, y.astype(np.int8), w.astype(np.int8)


def _curve(
    order: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    n_bins: int,
    kind: str,
) -> tuple[np.ndarray, np.ndarray]:
    n = order.size
    y_ord = y[order].astype(np.float64)
    w_ord = w[order].astype(np.float64)

    def prefix(col: np.ndarray) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(col)))

    t1 = prefix(y_ord * w_ord)
    t = prefix(w_ord)
    c1 = prefix(y_ord * (1.0 - w_ord))
    c = prefix(1.0 - w_ord)
    sizes = (np.arange(n_bins + 1, dtype=np.int64) * n) // n_bins
    fractions = np.arange(n_bins + 1, dtype=np.float64) / n_bins
    values = np.zeros(n_bins + 1)
    for k in range(1, n_bins + 1):
        i = sizes[k]
        if kind == "qini":
            defined = c[i] > 0.0
            if defined:
                values[k] = t1[i] - c1[i] * t[i] / c[i]
        else:
            defined = c[i] > 0.0 and t[i] > 0.0
            if defined:
                values[k] = t1[i] / t[i] - c1[i] / c[i]
        if not defined:
            values[k] = values[k - 1]
    return fractions, values


def _optimal_order(y: np.ndarray, w: np.ndarray) -> np.ndarray:
    treated = w == 1
    positive = y == 1
    return np.concatenate(
        [
            np.flatnonzero(treated & positive),
            np.flatnonzero(~treated & ~positive),
            np.flatnonzero(treated & ~positive),
            np.flatnonzero(~treated & positive),
        ]
    )


def _qini_coefficient(
    order: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    n_bins: int,
) -> float:
    fractions, model_values = _curve(order, y, w, n_bins, "qini")
    _, optimal_values = _curve(_optimal_order(y, w), y, w, n_bins, "qini")
    random_area = 0.5 * model_values[-1]
    optimal_area = float(_trapezoid(optimal_values, fractions))
    denom = optimal_area - random_area
    if denom == 0.0:
        raise MetricError(
            "qini coefficient undefined: optimal ranking has no area "
            "above the random baseline"
        )
    model_area = float(_trapezoid(model_values, fractions))
    return (model_area - random_area) / denom
