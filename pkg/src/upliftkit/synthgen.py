"""Seeded synthetic two-arm experiments with known per-row effects.

Features are i.i.d. standard normal and play one of three roles: informative
features drive the control-arm conversion probability through a calibrated
logistic form, irrelevant features carry no coefficient at all, and lift
features add a strictly positive, covariate-dependent gain on top of the
control probability. Both intercepts are calibrated by bisection against
the realized score sample, so target response rates are hit regardless of
feature counts or coefficient draws.

Outcomes are drawn by systematic sampling over a shuffled row order: each
row keeps its exact marginal conversion probability, while the realized
arm response rate lands within one count of the latent mean. That makes
generated datasets usable as rate fixtures, not just as distributions.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .data import Dataset, FeatureSchema
from .errors import CalibrationError, DataError

# Intercept search interval; sigmoid saturates far before these bounds.
_SEARCH_LO = -30.0
_SEARCH_HI = 30.0
_MAX_BISECT_STEPS = 200


@dataclass(frozen=True)
class SynthConfig:
    """Generator parameters.

    Args:
        n_per_arm: Rows generated for each arm; total is twice this.
        target_control_rate: Conversion rate the control arm is calibrated to.
        target_treated_rate: Conversion rate the treated arm is calibrated
            to; must not fall below the control target.
        n_informative: Features driving the control conversion probability.
        n_irrelevant: Features with zero coefficient everywhere.
        n_uplift: Features driving the treatment gain.
        seed: Master seed; equal configs generate identical datasets.
        calibration_tolerance: Allowed gap, in probability, between a
            calibrated mean rate and its target.
    """

    n_per_arm: int
    target_control_rate: float
    target_treated_rate: float
    n_informative: int = 2
    n_irrelevant: int = 1
    n_uplift: int = 2
    seed: int = 0
    calibration_tolerance: float = 1e-4

    def __post_init__(self) -> None:
        if self.n_per_arm < 1:
            raise DataError(f"n_per_arm must be >= 1, got {self.n_per_arm}")
        for label, rate in (
            ("target_control_rate", self.target_control_rate),
            ("target_treated_rate", self.target_treated_rate),
        ):
            if not 0.0 < rate < 1.0:
                raise DataError(f"{label} must be in (0, 1), got {rate}")
        if self.target_treated_rate < self.target_control_rate:
            raise DataError("target_treated_rate must be >= target_control_rate")
        if self.n_informative < 1:
            raise DataError("n_informative must be >= 1")
        if self.n_uplift < 1:
            raise DataError("n_uplift must be >= 1")
        if self.n_irrelevant < 0:
            raise DataError("n_irrelevant must be >= 0")
        if self.seed < 0:
            raise DataError(f"seed must be >= 0, got {self.seed}")
        if self.calibration_tolerance <= 0.0:
            raise DataError("calibration_tolerance must be positive")

    @property
    def n_features(self) -> int:
        return self.n_informative + self.n_irrelevant + self.n_uplift

    def feature_names(self) -> tuple[str, ...]:
        return tuple(
            [f"inf{i + 1}" for i in range(self.n_informative)]
            + [f"irr{i + 1}" for i in range(self.n_irrelevant)]
            + [f"upl{i + 1}" for i in range(self.n_uplift)]
        )


@dataclass(frozen=True)
class GeneratedDataset:
    """A generated dataset plus everything needed to audit it.

    ``p_control`` and ``p_treated`` are the latent conversion probabilities
    each row would have under control and treatment; ``true_cate`` is their
    difference. Coefficients and intercepts are the exact values used, so
    tests can recompute the latents from the features.
    """

    config: SynthConfig
    dataset: Dataset
    p_control: np.ndarray
    p_treated: np.ndarray
    true_cate: np.ndarray
    base_coef: np.ndarray
    lift_coef: np.ndarray
    base_intercept: float
    lift_intercept: float

    def __post_init__(self) -> None:
        n = len(self.dataset)
        for label, arr in (
            ("p_control", self.p_control),
            ("p_treated", self.p_treated),
            ("true_cate", self.true_cate),
        ):
            if arr.shape != (n,):
                raise DataError(f"{label} must have shape ({n},), got {arr.shape}")
        if np.any(self.p_control < 0.0) or np.any(self.p_control > 1.0):
            raise DataError("p_control must lie in [0, 1]")
        if np.any(self.p_treated < 0.0) or np.any(self.p_treated > 1.0):
            raise DataError("p_treated must lie in [0, 1]")
        for arr in (
            self.p_control,
            self.p_treated,
            self.true_cate,
            self.base_coef,
            self.lift_coef,
        ):
            arr.setflags(write=False)


def calibrate_intercept(
    target_rate: float,
    scores: np.ndarray,
    tol: float = 1e-4,
) -> float:
    """Intercept ``a`` with ``mean(sigmoid(a + scores))`` near ``target_rate``.

    Bisection over ``[-30, 30]`` against the empirical score sample.

    Args:
        target_rate: Desired mean probability, in (0, 1).
        scores: Sampled linear scores.
        tol: Acceptable gap between the achieved mean and the target.

    Returns:
        The calibrated intercept.

    Raises:
        CalibrationError: If the target is unreachable within the search
            interval at the given tolerance.
    """
    if not 0.0 < target_rate < 1.0:
        raise CalibrationError(f"target_rate must be in (0, 1), got {target_rate}")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 1 or scores.size == 0:
        raise CalibrationError("scores must be a non-empty 1-d array")
    return _bisect(lambda a: float(np.mean(_sigmoid(a + scores))) - target_rate, tol)


def generate(config: SynthConfig) -> GeneratedDataset:
    """Generate a dataset with exactly ``n_per_arm`` rows per arm.

    Control conversion probability is ``sigmoid(a0 + base_coef . x_inf)``
    with ``a0`` calibrated to the control target. The treated probability
    adds a positive gain, ``clip(p_control + sigmoid(a1 + lift_coef .
    x_upl), 0, 1)`` with ``a1`` calibrated so the treated mean hits its
    target; the per-row effect is therefore never negative.

    Raises:
        CalibrationError: When a target rate cannot be reached.
    """
    rng = np.random.default_rng(config.seed)
    n = 2 * config.n_per_arm
    x = rng.standard_normal((n, config.n_features))
    signs = rng.choice((-1.0, 1.0), size=config.n_informative)
    base_coef = rng.uniform(0.5, 1.5, size=config.n_informative) * signs
    lift_coef = rng.uniform(0.5, 1.5, size=config.n_uplift)

    base_cols = slice(0, config.n_informative)
    lift_cols = slice(config.n_informative + config.n_irrelevant, config.n_features)
    base_score = x[:, base_cols] @ base_coef
    lift_score = x[:, lift_cols] @ lift_coef

    w = np.zeros(n, dtype=np.int8)
    w[rng.permutation(n)[: config.n_per_arm]] = 1
    treated = w == 1

    # Each intercept is calibrated against the rows its arm will actually
    # draw outcomes for, so realized rates track the targets regardless of
    # which half of the sample landed in which arm.
    tol = config.calibration_tolerance
    a0 = calibrate_intercept(config.target_control_rate, base_score[~treated], tol)
    p_control = _sigmoid(a0 + base_score)

    def treated_gap(a: float) -> float:
        gain = _sigmoid(a + lift_score[treated])
        mean = float(np.mean(np.clip(p_control[treated] + gain, 0.0, 1.0)))
        return mean - config.target_treated_rate

    gap_floor = treated_gap(_SEARCH_LO)
    if gap_floor > 0.0:
        # The treated arm's base conversion alone meets or exceeds the
        # target, so the gain cannot be negative enough to land on it.
        # That is legitimate when the configured effect is smaller than
        # the arms' base-rate sampling gap; anything larger is an error.
        sampling = 3.0 * float(np.std(p_control[treated])) / np.sqrt(treated.sum())
        if gap_floor > tol + sampling:
            raise CalibrationError(
                f"treated target {config.target_treated_rate} is below the "
                f"arm's zero-gain conversion rate by {gap_floor:.3g}"
            )
        a1 = _SEARCH_LO
    else:
        a1 = _bisect(treated_gap, tol)
    p_treated = np.clip(p_control + _sigmoid(a1 + lift_score), 0.0, 1.0)

    p_assigned = np.where(treated, p_treated, p_control)
    y = np.zeros(n, dtype=np.int8)
    for arm in (0, 1):
        rows = np.flatnonzero(w == arm)
        y[rows] = _systematic_bernoulli(p_assigned[rows], rng)

    dataset = Dataset(FeatureSchema(config.feature_names()), x, w, y)
    return GeneratedDataset(
        config=config,
        dataset=dataset,
        p_control=p_control,
        p_treated=p_treated,
        true_cate=p_treated - p_control,
        base_coef=base_coef,
        lift_coef=lift_coef,
        base_intercept=a0,
        lift_intercept=a1,
    )


def export_ground_truth(g: GeneratedDataset, path: str | Path) -> None:
    """Write per-row latent probabilities and effects as CSV.

    Columns are ``p0`` (control probability), ``p1`` (treated probability),
    and ``tau`` (their difference), aligned with the dataset's rows.
    """
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["p0", "p1", "tau"])
        for a, b, c in zip(g.p_control, g.p_treated, g.true_cate):
            writer.writerow([str(float(a)), str(float(b)), str(float(c))])


def load_ground_truth(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Read a ground-truth CSV back as ``(p0, p1, tau)`` arrays.

    Raises:
        DataError: On a missing column or non-numeric value.
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
        try:
            pos = [header.index(c) for c in ("p0", "p1", "tau")]
        except ValueError:
            raise DataError(f"{path} must have columns p0, p1, tau") from None
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            try:
                rows.append([float(row[i]) for i in pos])
            except (ValueError, IndexError):
                raise DataError(f"{path}:{lineno}: malformed ground-truth row") from None
    if not rows:
        empty = np.empty(0)
        return empty, empty.copy(), empty.copy()
    arr = np.asarray(rows, dtype=np.float64)
    return arr[:, 0], arr[:, 1], arr[:, 2]


def _sigmoid(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _bisect(gap: Callable[[float], float], tol: float) -> float:
    """Root of a nondecreasing gap function over the intercept interval.

    Accepts an endpoint whose residual gap is within ``tol`` when the
    interval does not bracket a sign change (saturated sigmoid tails make
    that legitimate, e.g. a zero-gain calibration).
    """
    lo, hi = _SEARCH_LO, _SEARCH_HI
    f_lo = gap(lo)
    f_hi = gap(hi)
    if f_lo > 0.0 or f_hi < 0.0:
        for bound, value in ((lo, f_lo), (hi, f_hi)):
            if abs(value) <= tol:
                return bound
        raise CalibrationError(
            f"target rate unreachable: residuals {f_lo:.3g} and {f_hi:.3g} "
            f"at the interval bounds [{lo}, {hi}]"
        )
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT_STEPS):
        mid = 0.5 * (lo + hi)
        f_mid = gap(mid)
        if abs(f_mid) <= tol or (hi - lo) < 1e-12:
            break
        if f_mid > 0.0:
            hi = mid
        else:
            lo = mid
    if abs(gap(mid)) > tol:
        raise CalibrationError("bisection failed to reach the target tolerance")
    return mid


def _systematic_bernoulli(p: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Marginal-Bernoulli draws whose total is pinned to the latent sum.

    Systematic sampling over a shuffled order: a single uniform offset
    sweeps the cumulative probability line, selecting each row with its
    exact probability while the realized count stays within one of
    ``sum(p)``.
    """
    m = p.size
    order = rng.permutation(m)
    cumulative = np.concatenate(([0.0], np.cumsum(p[order])))
    offset = rng.random()
    marks = np.floor(cumulative - offset)
    y = np.empty(m, dtype=np.int8)
    y[order] = (np.diff(marks) >= 1.0).astype(np.int8)
    return y
