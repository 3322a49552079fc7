"""Gradient boosted trees with second-order (Newton) leaf updates.

The learner is deliberately small and exact: every split is found by
greedy enumeration of midpoints between consecutive distinct feature
values, leaves take the Newton step ``-G / (H + l2_reg)``, and all tie
breaks are fixed (lowest feature index, then lowest threshold), so a
model is a pure function of the data and its config. Feature evaluation
can fan out over threads, but candidate splits are reduced in feature
order, which keeps models bit-identical for any ``n_jobs``.

Supported losses: ``squared`` (L(r, t) = (r - t)^2 / 2) for regression
targets and ``logistic`` (binary cross-entropy on the raw margin) for
0/1 targets. Predictions are on the response scale: raw values for
``squared``, probabilities for ``logistic``.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .errors import ModelError

LOSSES = ("squared", "logistic")

MODEL_FORMAT_VERSION = 1

# Clamp for the mean of logistic targets before taking log-odds, so a
# constant target column still yields a finite base score.
_MEAN_EPS = 1e-12


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters.

    Args:
        loss: ``squared`` or ``logistic``.
        n_trees: Boosting rounds.
        max_depth: Maximum tree depth; 0 means a single leaf per tree.
        learning_rate: Shrinkage applied to every leaf value.
        min_samples_leaf: Minimum rows on each side of a split.
        subsample: Fraction of rows drawn (without replacement) per tree.
        l2_reg: L2 penalty on leaf values; appears as ``H + l2_reg``.
        n_jobs: Worker threads for split search; never affects the model.
        seed: Seeds row subsampling; unused when ``subsample`` is 1.
    """

    loss: str = "squared"
    n_trees: int = 100
    max_depth: int = 3
    learning_rate: float = 0.1
    min_samples_leaf: int = 20
    subsample: float = 1.0
    l2_reg: float = 1.0
    n_jobs: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.loss not in LOSSES:
            raise ModelError(f"unknown loss {self.loss!r}, expected one of {LOSSES}")
        if self.n_trees < 1:
            raise ModelError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth < 0:
            raise ModelError(f"max_depth must be >= 0, got {self.max_depth}")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ModelError(
                f"learning_rate must be in (0, 1], got {self.learning_rate}"
            )
        if self.min_samples_leaf < 1:
            raise ModelError(
                f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}"
            )
        if not 0.0 < self.subsample <= 1.0:
            raise ModelError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.l2_reg < 0.0:
            raise ModelError(f"l2_reg must be >= 0, got {self.l2_reg}")
        if self.n_jobs < 1:
            raise ModelError(f"n_jobs must be >= 1, got {self.n_jobs}")
        if self.seed < 0:
            raise ModelError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class Tree:
    """One regression tree in flat-array form.

    ``feature[i] == -1`` marks node ``i`` as a leaf; leaves carry their
    shrinkage-scaled output in ``value``. Internal nodes route rows with
    ``x[:, feature] <= threshold`` to ``left``.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def __post_init__(self) -> None:
        feature = np.asarray(self.feature, dtype=np.int32)
        threshold = np.asarray(self.threshold, dtype=np.float64)
        left = np.asarray(self.left, dtype=np.int32)
        right = np.asarray(self.right, dtype=np.int32)
        value = np.asarray(self.value, dtype=np.float64)
        n = feature.shape[0]
        if n == 0:
            raise ModelError("tree has no nodes")
        for arr in (threshold, left, right, value):
            if arr.shape != (n,):
                raise ModelError("tree arrays must share one length")
        for name, arr in (
            ("feature", feature),
            ("threshold", threshold),
            ("left", left),
            ("right", right),
            ("value", value),
        ):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]


@dataclass(frozen=True)
class Model:
    """A fitted boosted-tree ensemble.

    ``train_losses`` holds the mean training loss after each boosting
    round, in order; it is saved with the model as training provenance.
    """

    loss: str
    base_score: float
    feature_names: tuple[str, ...]
    trees: tuple[Tree, ...]
    config: TrainConfig
    train_losses: tuple[float, ...]

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


def loss_gradient(
    loss: str,
    raw: np.ndarray,
    targets: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample gradient and hessian of the loss at a raw prediction.

    Args:
        loss: ``squared`` or ``logistic``.
        raw: Raw (margin-scale) predictions.
        targets: Regression targets, or 0/1 labels for ``logistic``.

    Returns:
        ``(g, h)`` arrays: for ``squared`` these are ``raw - targets`` and
        ones; for ``logistic``, ``sigmoid(raw) - targets`` and
        ``sigmoid(raw) * (1 - sigmoid(raw))``.
    """
    raw = np.asarray(raw, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if loss == "squared":
        return raw - targets, np.ones_like(raw)
    if loss == "logistic":
        prob = _sigmoid(raw)
        return prob - targets, prob * (1.0 - prob)
    raise ModelError(f"unknown loss {loss!r}, expected one of {LOSSES}")


def fit(
    x: np.ndarray,
    targets: np.ndarray,
    config: TrainConfig = TrainConfig(),
    feature_names: tuple[str, ...] | None = None,
) -> Model:
    """Train an ensemble on a feature matrix and per-row targets.

    Args:
        x: Feature matrix, shape (n, d), finite floats.
        targets: Length-n target vector; must be 0/1 for logistic loss.
        config: Hyperparameters.
        feature_names: Names recorded in the model and checked at predict
            time; defaults to ``f0 .. f{d-1}``.

    Returns:
        The fitted model.

    Raises:
        ModelError: On malformed inputs or a name/column count mismatch.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ModelError(f"x must be a non-empty 2-d matrix, got shape {x.shape}")
    n, d = x.shape
    if t.shape != (n,):
        raise ModelError(f"targets must have shape ({n},), got {t.shape}")
    if not np.all(np.isfinite(x)) or not np.all(np.isfinite(t)):
        raise ModelError("features and targets must be finite")
    if config.loss == "logistic" and not np.isin(t, (0.0, 1.0)).all():
        raise ModelError("logistic loss needs 0/1 targets")
    if feature_names is None:
        feature_names = tuple(f"f{j}" for j in range(d))
    feature_names = tuple(feature_names)
    if len(feature_names) != d:
        raise ModelError(f"{len(feature_names)} feature names for {d} columns")

    if config.loss == "squared":
        base = float(t.mean())
    else:
        m = min(max(float(t.mean()), _MEAN_EPS), 1.0 - _MEAN_EPS)
        base = math.log(m / (1.0 - m))

    # Rows pre-sorted by each feature once; nodes filter these orderings
    # instead of re-sorting.
    sorted_by_feature = [np.argsort(x[:, j], kind="stable") for j in range(d)]
    rng = np.random.default_rng(config.seed)
    raw = np.full(n, base)
    trees: list[Tree] = []
    losses: list[float] = []

    executor = (
        ThreadPoolExecutor(max_workers=config.n_jobs) if config.n_jobs > 1 else None
    )
    try:
        for _ in range(config.n_trees):
            g, h = loss_gradient(config.loss, raw, t)
            if config.subsample < 1.0:
                k = max(1, round(n * config.subsample))
                mask = np.zeros(n, dtype=bool)
                mask[rng.permutation(n)[:k]] = True
            else:
                mask = np.ones(n, dtype=bool)
            tree = _grow_tree(x, g, h, mask, sorted_by_feature, config, executor)
            trees.append(tree)
            raw += _tree_predict(tree, x)
            losses.append(_mean_loss(config.loss, raw, t))
    finally:
        if executor is not None:
            executor.shutdown()

    return Model(
        loss=config.loss,
        base_score=base,
        feature_names=feature_names,
        trees=tuple(trees),
        config=config,
        train_losses=tuple(losses),
    )


def predict(model: Model, x: np.ndarray) -> np.ndarray:
    """Response-scale predictions for a feature matrix.

    Args:
        model: Fitted ensemble.
        x: Matrix with one column per model feature.

    Returns:
        Raw sums for squared loss, probabilities for logistic.

    Raises:
        ModelError: If the column count does not match the model.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.n_features:
        raise ModelError(
            f"x must have shape (n, {model.n_features}), got {x.shape}"
        )
    if not np.all(np.isfinite(x)):
        raise ModelError("features must be finite")
    raw = np.full(x.shape[0], model.base_score)
    for tree in model.trees:
        raw += _tree_predict(tree, x)
    if model.loss == "logistic":
        return _sigmoid(raw)
    return raw


def save_model(model: Model, path: str | Path) -> None:
    """Serialize a model to versioned JSON."""
    doc = {
        "format_version": MODEL_FORMAT_VERSION,
        "loss": model.loss,
        "base_score": model.base_score,
        "feature_names": list(model.feature_names),
        "config": asdict(model.config),
        "train_losses": list(model.train_losses),
        "trees": [
            {
                "feature": tree.feature.tolist(),
                "threshold": tree.threshold.tolist(),
                "left": tree.left.tolist(),
                "right": tree.right.tolist(),
                "value": tree.value.tolist(),
            }
            for tree in model.trees
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def load_model(path: str | Path) -> Model:
    """Read a model written by :func:`save_model`.

    Raises:
        ModelError: On unreadable JSON, a missing field, or a format
            version this code does not understand.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ModelError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError(f"{path}: model file must hold a JSON object")
    version = doc.get("format_version")
    if version != MODEL_FORMAT_VERSION:
        raise ModelError(
            f"{path}: unsupported model format_version {version!r}, "
            f"expected {MODEL_FORMAT_VERSION}"
        )
    try:
        config = TrainConfig(**doc["config"])
        trees = tuple(
            Tree(
                feature=np.asarray(td["feature"]),
                threshold=np.asarray(td["threshold"]),
                left=np.asarray(td["left"]),
                right=np.asarray(td["right"]),
                value=np.asarray(td["value"]),
            )
            for td in doc["trees"]
        )
        return Model(
            loss=doc["loss"],
            base_score=float(doc["base_score"]),
            feature_names=tuple(doc["feature_names"]),
            trees=trees,
            config=config,
            train_losses=tuple(float(v) for v in doc["train_losses"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"{path}: malformed model file: {exc}") from exc


def _sigmoid(raw: np.ndarray) -> np.ndarray:
    out = np.empty_like(raw)
    pos = raw >= 0.0
    out[pos] = 1.0 / (1.0 + np.exp(-raw[pos]))
    ez = np.exp(raw[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _mean_loss(loss: str, raw: np.ndarray, targets: np.ndarray) -> float:
    if loss == "squared":
        return float(np.mean(0.5 * (raw - targets) ** 2))
    # -log sigma(r) = logaddexp(0, -r); -log(1 - sigma(r)) adds r on top.
    return float(np.mean(np.logaddexp(0.0, -raw) + (1.0 - targets) * raw))


def _eval_feature(
    values: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    config: TrainConfig,
) -> tuple[float, float] | None:
    """Best split of one feature; inputs are sorted by feature value.

    Returns ``(gain, threshold)`` for the highest-gain valid split, or
    ``None`` when no split is valid. Equal gains resolve to the lowest
    threshold because candidates are scanned in value order.
    """
    n = values.shape[0]
    min_leaf = config.min_samples_leaf
    if n < 2 * min_leaf:
        return None
    cg = np.cumsum(g)
    ch = np.cumsum(h)
    g_total = cg[-1]
    h_total = ch[-1]
    # Split index i puts rows [0, i) left; valid when both sides are big
    # enough and the adjacent values actually differ.
    i = np.arange(min_leaf, n - min_leaf + 1)
    i = i[values[i] > values[i - 1]]
    if i.size == 0:
        return None
    gl = cg[i - 1]
    hl = ch[i - 1]
    gr = g_total - gl
    hr = h_total - hl
    lam = config.l2_reg
    parent = g_total * g_total / (h_total + lam)
    gain = 0.5 * (gl * gl / (hl + lam) + gr * gr / (hr + lam) - parent)
    best = int(np.argmax(gain))
    if gain[best] <= 0.0:
        return None
    split = int(i[best])
    threshold = 0.5 * (values[split - 1] + values[split])
    return float(gain[best]), float(threshold)


def _grow_tree(
    x: np.ndarray,
    g: np.ndarray,
    h: np.ndarray,
    mask: np.ndarray,
    sorted_by_feature: list[np.ndarray],
    config: TrainConfig,
    executor: ThreadPoolExecutor | None,
) -> Tree:
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []
    d = x.shape[1]

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(0.0)
        return len(feature) - 1

    def build(node_mask: np.ndarray, depth: int) -> int:
        node = new_node()
        rows_sorted = [
            order[node_mask[order]] for order in sorted_by_feature
        ]
        n_node = rows_sorted[0].shape[0]
        g_sum = float(g[node_mask].sum())
        h_sum = float(h[node_mask].sum())

        best: tuple[float, int, float] | None = None
        if depth < config.max_depth and n_node >= 2 * config.min_samples_leaf:
            def eval_one(j: int) -> tuple[float, float] | None:
                rows = rows_sorted[j]
                return _eval_feature(x[rows, j], g[rows], h[rows], config)
            if executor is not None:
                results = list(executor.map(eval_one, range(d)))
            else:
                results = [eval_one(j) for j in range(d)]
            # Reduce in feature order with strict comparisons, so ties go
            # to the lowest feature index regardless of thread count.
            for j, res in enumerate(results):
                if res is not None and (best is None or res[0] > best[0]):
                    best = (res[0], j, res[1])

        if best is None:
            value[node] = -config.learning_rate * g_sum / (h_sum + config.l2_reg)
            return node

        _, j, thr = best
        feature[node] = j
        threshold[node] = thr
        go_left = node_mask & (x[:, j] <= thr)
        left[node] = build(go_left, depth + 1)
        right[node] = build(node_mask & ~go_left, depth + 1)
        return node

    build(mask, 0)
    return Tree(
        feature=np.asarray(feature),
        threshold=np.asarray(threshold),
        left=np.asarray(left),
        right=np.asarray(right),
        value=np.asarray(value),
    )


def _tree_predict(tree: Tree, x: np.ndarray) -> np.ndarray:
    idx = np.zeros(x.shape[0], dtype=np.int32)
    while True:
        rows = np.flatnonzero(tree.feature[idx] >= 0)
        if rows.size == 0:
            return tree.value[idx]
        at = idx[rows]
        go_left = x[rows, tree.feature[at]] <= tree.threshold[at]
        idx[rows] = np.where(go_left, tree.left[at], tree.right[at])
