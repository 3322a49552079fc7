"""Config-driven experiment pipeline behind the CLI.

A run compares outcome transforms on equal footing: per repetition it
generates (or loads) a dataset, makes one stratified train/test split,
trains one model per transform on the transformed targets with shared
hyperparameters and an identical learner seed, scores the test split, and
evaluates every approach with the same metric settings. Scalar results are
aggregated as mean with min/max range across repetitions.

Everything random is derived from one master seed, so a config file fully
determines the manifest (timing aside). Repetition ``r`` draws its
generator, split, and learner seeds from a seed sequence spawned at key
``(r,)``; approaches within a repetition intentionally share the learner
seed so two mathematically identical target constructions train
bit-identical models.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    ArmStats,
    Dataset,
    arm_stats,
    content_digest,
    load_csv,
    read_column,
    split_indices,
    write_csv,
)
from .errors import ConfigError, DataError, ModelError, UpliftError
from .figures import save_comparison_figure, save_curve_figures
from .gbt import TrainConfig, fit, load_model, predict, save_model
from .metrics import (
    MetricsReport,
    evaluate_scores,
    phi_correlation,
    write_curves_csv,
)
from .propensity import (
    ConstantPropensity,
    PerSampleScores,
    PropensityModel,
    estimate_constant,
)
from .synthgen import SynthConfig, export_ground_truth, generate
from .transforms import TransformSpec, apply, class_transform, uplift_from_prediction

MANIFEST_FORMAT_VERSION = 1

# Synthetic presets targeting the two benchmark regimes: moderate response
# rates with a large effect, and low response rates with a small one.
PRESETS: dict[str, dict[str, float | int]] = {
    "table3-high": {
        "n_per_arm": 10_000,
        "target_control_rate": 0.3038,
        "target_treated_rate": 0.5021,
    },
    "table3-low": {
        "n_per_arm": 10_000,
        "target_control_rate": 0.0553,
        "target_treated_rate": 0.0784,
    },
}

_LEARNER_MANAGED_KEYS = ("loss", "seed")


@dataclass(frozen=True)
class CsvSource:
    """Dataset read from disk, with column roles named in config."""

    path: Path
    treatment_col: str = "w"
    outcome_col: str = "y"
    propensity_col: str | None = None


@dataclass(frozen=True)
class Approach:
    """One named transform under comparison."""

    name: str
    spec: TransformSpec


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved run configuration.

    ``source`` is either a :class:`SynthConfig` whose seed field is a
    placeholder (per-repetition seeds are derived from ``seed``) or a
    :class:`CsvSource`. ``preset`` records the preset name when one was
    expanded, purely for the manifest echo.
    """

    source: SynthConfig | CsvSource
    approaches: tuple[Approach, ...]
    learner: TrainConfig
    output_dir: Path
    test_fraction: float = 0.2
    n_bins: int = 100
    n_repetitions: int = 5
    seed: int = 0
    preset: str | None = None

    def __post_init__(self) -> None:
        if not self.approaches:
            raise ConfigError("at least one transform is required")
        names = [a.name for a in self.approaches]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate approach names: {sorted(names)}")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(
                f"test_fraction must be in (0, 1), got {self.test_fraction}"
            )
        if self.n_bins < 1:
            raise ConfigError(f"n_bins must be >= 1, got {self.n_bins}")
        if self.n_repetitions < 1:
            raise ConfigError(
                f"n_repetitions must be >= 1, got {self.n_repetitions}"
            )
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class RunManifest:
    """Everything a finished run wrote, in one auditable document."""

    format_version: int
    tool_version: str
    config: dict
    repetitions: tuple[dict, ...]
    approaches: tuple[dict, ...]
    comparison: tuple[dict, ...]
    timing: dict

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "tool_version": self.tool_version,
            "config": self.config,
            "repetitions": list(self.repetitions),
            "approaches": list(self.approaches),
            "comparison": list(self.comparison),
            "timing": self.timing,
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")


def approach_name(spec: TransformSpec) -> str:
    """Stable directory-safe name for a transform under comparison."""
    if spec.kind != "shifted":
        return spec.kind
    if spec.shift is None:
        return "shifted-auto"
    return f"shifted-{spec.shift:g}"


def set_override(doc: dict, dotted_key: str, raw_value: str) -> None:
    """Apply one ``--set key=value`` override to a raw config document.

    The key is a dot-separated path of dict keys; the value is parsed as
    JSON when possible and kept as a string otherwise. Intermediate dicts
    are created as needed.
    """
    parts = dotted_key.split(".")
    if not all(parts):
        raise ConfigError(f"malformed override key {dotted_key!r}")
    node = doc
    for part in parts[:-1]:
        child = node.setdefault(part, {})
        if not isinstance(child, dict):
            raise ConfigError(
                f"cannot override {dotted_key!r}: {part!r} is not a section"
            )
        node = child
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    node[parts[-1]] = value


def parse_synth_config(doc: dict, seed: int = 0) -> tuple[SynthConfig, str | None]:
    """Build a generator config from a raw dict, expanding any preset.

    A ``preset`` key pulls named defaults which the remaining keys may
    override. Returns the config and the preset name, if one was used.

    Raises:
        ConfigError: On unknown keys or an unknown preset name.
    """
    if not isinstance(doc, dict):
        raise ConfigError("synth section must be an object")
    doc = dict(doc)
    preset = doc.pop("preset", None)
    params: dict = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                f"unknown preset {preset!r}; available: {sorted(PRESETS)}"
            )
        params.update(PRESETS[preset])
    allowed = {
        "n_per_arm",
        "target_control_rate",
        "target_treated_rate",
        "n_informative",
        "n_irrelevant",
        "n_uplift",
        "calibration_tolerance",
        "seed",
    }
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown synth keys: {sorted(unknown)}")
    params.update(doc)
    params.setdefault("seed", seed)
    missing = {
        "n_per_arm",
        "target_control_rate",
        "target_treated_rate",
    } - set(params)
    if missing:
        raise ConfigError(f"synth config is missing {sorted(missing)}")
    try:
        return SynthConfig(**params), preset
    except DataError as exc:
        raise ConfigError(f"invalid synth config: {exc}") from exc


def parse_config(doc: dict, base_dir: str | Path = ".") -> ExperimentConfig:
    """Validate a raw run-config document into an :class:`ExperimentConfig`.

    Relative paths (CSV input, output directory) resolve against
    ``base_dir``, normally the config file's directory.

    Raises:
        ConfigError: On missing or unknown keys, malformed sections, or
            values their owning module rejects.
    """
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    base_dir = Path(base_dir)
    allowed = {
        "data",
        "transforms",
        "learner",
        "output_dir",
        "test_fraction",
        "n_bins",
        "n_repetitions",
        "seed",
    }
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("data", "transforms", "output_dir"):
        if key not in doc:
            raise ConfigError(f"config is missing {key!r}")

    source, preset = _parse_data_section(doc["data"], base_dir)
    approaches = _parse_transforms_section(doc["transforms"])
    learner = _parse_learner_section(doc.get("learner", {}))
    output_dir = base_dir / str(doc["output_dir"])

    try:
        return ExperimentConfig(
            source=source,
            approaches=approaches,
            learner=learner,
            output_dir=output_dir,
            test_fraction=float(doc.get("test_fraction", 0.2)),
            n_bins=int(doc.get("n_bins", 100)),
            n_repetitions=int(doc.get("n_repetitions", 5)),
            seed=int(doc.get("seed", 0)),
            preset=preset,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid config value: {exc}") from exc


def _parse_data_section(doc: object, base_dir: Path) -> tuple[SynthConfig | CsvSource, str | None]:
    if not isinstance(doc, dict):
        raise ConfigError("data section must be an object")
    has_csv = "csv" in doc
    has_synth = "synth" in doc or "preset" in doc
    if has_csv == has_synth:
        raise ConfigError(
            "data section must hold exactly one of: a csv block, "
            "or a synth block / preset name"
        )
    if has_csv:
        unknown = set(doc) - {"csv"}
        if unknown:
            raise ConfigError(f"unknown data keys: {sorted(unknown)}")
        csv_doc = doc["csv"]
        if not isinstance(csv_doc, dict) or "path" not in csv_doc:
            raise ConfigError("csv block needs a path")
        unknown = set(csv_doc) - {"path", "treatment_col", "outcome_col", "propensity_col"}
        if unknown:
            raise ConfigError(f"unknown csv keys: {sorted(unknown)}")
        prop = csv_doc.get("propensity_col")
        return (
            CsvSource(
                path=base_dir / str(csv_doc["path"]),
                treatment_col=str(csv_doc.get("treatment_col", "w")),
                outcome_col=str(csv_doc.get("outcome_col", "y")),
                propensity_col=None if prop is None else str(prop),
            ),
            None,
        )
    synth_doc = dict(doc.get("synth", {}))
    if "preset" in doc:
        synth_doc.setdefault("preset", doc["preset"])
        unknown = set(doc) - {"preset", "synth"}
    else:
        unknown = set(doc) - {"synth"}
    if unknown:
        raise ConfigError(f"unknown data keys: {sorted(unknown)}")
    if "seed" in synth_doc:
        raise ConfigError(
            "data.synth.seed is managed by the run (derived per repetition); "
            "set the top-level seed instead"
        )
    return parse_synth_config(synth_doc)


def _parse_transforms_section(doc: object) -> tuple[Approach, ...]:
    if not isinstance(doc, list) or not doc:
        raise ConfigError("transforms must be a non-empty list")
    approaches: list[Approach] = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict) or "kind" not in entry:
            raise ConfigError(f"transforms[{i}] must be an object with a kind")
        unknown = set(entry) - {"kind", "shift"}
        if unknown:
            raise ConfigError(f"transforms[{i}] has unknown keys: {sorted(unknown)}")
        kind = entry["kind"]
        shifts = entry.get("shift")
        sweep = shifts if isinstance(shifts, list) else [shifts]
        if not sweep:
            raise ConfigError(f"transforms[{i}] has an empty shift sweep")
        for shift in sweep:
            try:
                spec = TransformSpec(
                    kind=kind, shift=None if shift is None else float(shift)
                )
            except (UpliftError, TypeError, ValueError) as exc:
                raise ConfigError(f"transforms[{i}]: {exc}") from exc
            approaches.append(Approach(name=approach_name(spec), spec=spec))
    return tuple(approaches)


def _parse_learner_section(doc: object) -> TrainConfig:
    if not isinstance(doc, dict):
        raise ConfigError("learner section must be an object")
    managed = set(doc) & set(_LEARNER_MANAGED_KEYS)
    if managed:
        raise ConfigError(
            f"learner keys {sorted(managed)} are managed by the run: the loss "
            "follows each transform and the seed derives from the master seed"
        )
    allowed = {
        "n_trees",
        "max_depth",
        "learning_rate",
        "min_samples_leaf",
        "subsample",
        "l2_reg",
        "n_jobs",
    }
    unknown = set(doc) - allowed
    if unknown:
        raise ConfigError(f"unknown learner keys: {sorted(unknown)}")
    try:
        return TrainConfig(**doc)
    except (UpliftError, TypeError) as exc:
        raise ConfigError(f"invalid learner config: {exc}") from exc


def rep_seeds(master_seed: int, rep: int) -> tuple[int, int, int]:
    """Generator, split, and learner seeds for one repetition.

    Spawned from the master seed at key ``(rep,)``, so repetitions are
    statistically independent while staying reproducible.
    """
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(rep,))
    a, b, c = (int(v) for v in ss.generate_state(3))
    return a, b, c


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Execute a full comparison run and write all artifacts.

    Per repetition and approach this writes ``model.json``, ``scores.csv``,
    ``report.txt``, ``curves.csv``, and the two curve figures under
    ``rep<r>/<approach>/``. The top level gets ``comparison.csv``,
    ``comparison.png``, and ``manifest.json``. A failing approach is
    recorded in the manifest and does not stop the others.

    Returns:
        The manifest, as written to disk.
    """
    started = time.perf_counter()
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)

    csv_data: tuple[Dataset, np.ndarray | None] | None = None
    if isinstance(config.source, CsvSource):
        csv_data = _load_csv_source(config.source)

    rep_docs: list[dict] = []
    results: dict[str, list[dict]] = {a.name: [] for a in config.approaches}
    curve_sums: dict[str, np.ndarray] = {}
    curve_counts: dict[str, int] = {}

    for rep in range(config.n_repetitions):
        synth_seed, split_seed, learner_seed = rep_seeds(config.seed, rep)
        if csv_data is None:
            assert isinstance(config.source, SynthConfig)
            generated = generate(replace(config.source, seed=synth_seed))
            ds, prop_scores = generated.dataset, None
        else:
            ds, prop_scores = csv_data
        train_idx, test_idx = split_indices(
            ds.w, ds.y, config.test_fraction, split_seed
        )
        train = ds.subset(train_idx)
        test = ds.subset(test_idx)
        if prop_scores is None:
            prop: PropensityModel = estimate_constant(train)
        else:
            prop = PerSampleScores(prop_scores[train_idx])
        rep_docs.append(
            {
                "rep": rep,
                "seeds": {
                    "synth": synth_seed,
                    "split": split_seed,
                    "learner": learner_seed,
                },
                "dataset": _dataset_doc(ds),
                "train_digest": content_digest(train),
                "test_digest": content_digest(test),
            }
        )
        for approach in config.approaches:
            rep_dir = out / f"rep{rep}" / approach.name
            rep_dir.mkdir(parents=True, exist_ok=True)
            try:
                result, report = _run_approach(
                    approach, train, test, prop, config, learner_seed, rep_dir
                )
                key = approach.name
                if key not in curve_sums:
                    curve_sums[key] = np.zeros_like(report.qini_values)
                    curve_counts[key] = 0
                curve_sums[key] = curve_sums[key] + report.qini_values
                curve_counts[key] += 1
            except UpliftError as exc:
                result = {
                    "rep": rep,
                    "error": {"category": exc.category, "message": str(exc)},
                }
            results[approach.name].append(result)

    approach_docs = [
        {
            "name": a.name,
            "kind": a.spec.kind,
            "shift": a.spec.shift,
            "repetitions": results[a.name],
            "summary": _summarize(results[a.name]),
        }
        for a in config.approaches
    ]
    comparison = _comparison_table(approach_docs)
    _write_comparison_csv(comparison, out / "comparison.csv")
    mean_curves = {
        name: curve_sums[name] / curve_counts[name]
        for name in (a.name for a in config.approaches)
        if curve_counts.get(name)
    }
    if mean_curves:
        fractions = np.arange(config.n_bins + 1) / config.n_bins
        save_comparison_figure(fractions, mean_curves, out / "comparison.png")

    manifest = RunManifest(
        format_version=MANIFEST_FORMAT_VERSION,
        tool_version=__version__,
        config=_config_echo(config),
        repetitions=tuple(rep_docs),
        approaches=tuple(approach_docs),
        comparison=tuple(comparison),
        timing={"seconds": time.perf_counter() - started},
    )
    manifest.write(out / "manifest.json")
    return manifest


def _load_csv_source(source: CsvSource) -> tuple[Dataset, np.ndarray | None]:
    drop = (source.propensity_col,) if source.propensity_col else ()
    ds = load_csv(
        source.path,
        treatment_col=source.treatment_col,
        outcome_col=source.outcome_col,
        drop_cols=drop,
    )
    scores = None
    if source.propensity_col:
        scores = read_column(source.path, source.propensity_col)
    return ds, scores


def _run_approach(
    approach: Approach,
    train: Dataset,
    test: Dataset,
    prop: PropensityModel,
    config: ExperimentConfig,
    learner_seed: int,
    rep_dir: Path,
) -> tuple[dict, MetricsReport]:
    table = apply(approach.spec, train, prop)
    loss = "logistic" if table.task_kind == "classification" else "squared"
    train_config = replace(config.learner, loss=loss, seed=learner_seed)
    model = fit(train.x, table.targets, train_config, train.schema.names)
    save_model(model, rep_dir / "model.json")
    raw = predict(model, test.x)
    uplift = uplift_from_prediction(approach.spec.kind, raw)
    write_scores_csv(uplift, rep_dir / "scores.csv")
    report = evaluate_scores(uplift, test.y, test.w, config.n_bins)
    write_curves_csv(report, rep_dir / "curves.csv")
    save_curve_figures(report, rep_dir, label=approach.name)
    test_stats = arm_stats(test)
    p_value = prop.p if isinstance(prop, ConstantPropensity) else None
    _write_report_txt(
        rep_dir / "report.txt",
        [
            ("approach", approach.name),
            ("transform", approach.spec.kind),
            ("shift", table.shift),
            ("loss", loss),
            ("propensity", "per-sample" if p_value is None else p_value),
            ("train_rows", len(train)),
            ("test_rows", len(test)),
            ("test_control", test_stats.n_control),
            ("test_treated", test_stats.n_treated),
            ("test_control_rate", test_stats.rate_control),
            ("test_treated_rate", test_stats.rate_treated),
            ("qini_coefficient", report.qini_coefficient),
            ("auuc", report.auuc),
            *(
                (f"uplift_at_decile_{i + 1}", float(v))
                for i, v in enumerate(report.uplift_at_deciles)
            ),
            ("model_file", "model.json"),
            ("scores_file", "scores.csv"),
            ("curves_file", "curves.csv"),
            ("figures", "qini.png uplift.png"),
        ],
    )
    result = {
        "shift_used": table.shift,
        "metrics": {
            "qini_coefficient": report.qini_coefficient,
            "auuc": report.auuc,
            "uplift_at_deciles": [float(v) for v in report.uplift_at_deciles],
        },
        "files": {
            "model": str(rep_dir.relative_to(config.output_dir) / "model.json"),
            "report": str(rep_dir.relative_to(config.output_dir) / "report.txt"),
            "curves": str(rep_dir.relative_to(config.output_dir) / "curves.csv"),
            "scores": str(rep_dir.relative_to(config.output_dir) / "scores.csv"),
        },
    }
    return result, report


def _dataset_doc(ds: Dataset) -> dict:
    stats = arm_stats(ds)
    try:
        phi = phi_correlation(class_transform(ds.y, ds.w), ds.w)
    except UpliftError:
        phi = None
    return {
        "rows": len(ds),
        "digest": content_digest(ds),
        "arm_stats": arm_stats_doc(stats),
        "phi_class_vs_treatment": phi,
    }


def arm_stats_doc(stats: ArmStats) -> dict:
    """Arm statistics as a JSON-ready mapping."""
    return {
        "n_control": stats.n_control,
        "n_treated": stats.n_treated,
        "positives_control": stats.positives_control,
        "positives_treated": stats.positives_treated,
        "rate_control": stats.rate_control,
        "rate_treated": stats.rate_treated,
        "rate_difference": stats.rate_difference,
        "treated_fraction": stats.treated_fraction,
    }


def _summarize(rep_results: list[dict]) -> dict:
    qini = [r["metrics"]["qini_coefficient"] for r in rep_results if "metrics" in r]
    auuc = [r["metrics"]["auuc"] for r in rep_results if "metrics" in r]
    failed = sum(1 for r in rep_results if "error" in r)
    if not qini:
        return {"reps_ok": 0, "reps_failed": failed, "qini": None, "auuc": None}
    return {
        "reps_ok": len(qini),
        "reps_failed": failed,
        "qini": {
            "mean": float(np.mean(qini)),
            "min": float(np.min(qini)),
            "max": float(np.max(qini)),
        },
        "auuc": {
            "mean": float(np.mean(auuc)),
            "min": float(np.min(auuc)),
            "max": float(np.max(auuc)),
        },
    }


def _comparison_table(approach_docs: list[dict]) -> list[dict]:
    rows = []
    for doc in approach_docs:
        summary = doc["summary"]
        rows.append(
            {
                "approach": doc["name"],
                "reps_ok": summary["reps_ok"],
                "qini_mean": None if summary["qini"] is None else summary["qini"]["mean"],
                "qini_min": None if summary["qini"] is None else summary["qini"]["min"],
                "qini_max": None if summary["qini"] is None else summary["qini"]["max"],
                "auuc_mean": None if summary["auuc"] is None else summary["auuc"]["mean"],
                "auuc_min": None if summary["auuc"] is None else summary["auuc"]["min"],
                "auuc_max": None if summary["auuc"] is None else summary["auuc"]["max"],
            }
        )
    # Best first; failed approaches sink to the bottom, alphabetical.
    rows.sort(
        key=lambda r: (
            r["qini_mean"] is None,
            -(r["qini_mean"] or 0.0),
            r["approach"],
        )
    )
    return rows


def _write_comparison_csv(rows: list[dict], path: Path) -> None:
    columns = [
        "approach",
        "reps_ok",
        "qini_mean",
        "qini_min",
        "qini_max",
        "auuc_mean",
        "auuc_min",
        "auuc_max",
    ]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow(["" if row[c] is None else str(row[c]) for c in columns])


def _config_echo(config: ExperimentConfig) -> dict:
    if isinstance(config.source, SynthConfig):
        source = asdict(config.source)
        del source["seed"]
        data = {"synth": source}
        if config.preset is not None:
            data["preset"] = config.preset
    else:
        data = {
            "csv": {
                "path": str(config.source.path),
                "treatment_col": config.source.treatment_col,
                "outcome_col": config.source.outcome_col,
                "propensity_col": config.source.propensity_col,
            }
        }
    learner = asdict(config.learner)
    for key in _LEARNER_MANAGED_KEYS:
        del learner[key]
    return {
        "data": data,
        "approaches": [
            {"name": a.name, "kind": a.spec.kind, "shift": a.spec.shift}
            for a in config.approaches
        ],
        "learner": learner,
        "test_fraction": config.test_fraction,
        "n_bins": config.n_bins,
        "n_repetitions": config.n_repetitions,
        "seed": config.seed,
        "output_dir": str(config.output_dir),
    }


def write_scores_csv(scores: np.ndarray, path: str | Path) -> None:
    """Write a one-column ``score`` CSV, order-preserving."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["score"])
        for v in np.asarray(scores, dtype=np.float64):
            writer.writerow([str(float(v))])


def _write_report_txt(path: Path, pairs: list[tuple[str, object]]) -> None:
    lines = []
    for key, value in pairs:
        if isinstance(value, float):
            value = str(value)
        elif value is None:
            value = "n/a"
        lines.append(f"{key}: {value}")
    path.write_text("\n".join(lines) + "\n")


def cmd_synth(config: SynthConfig, out_dir: str | Path) -> Path:
    """Generate one dataset and write it with its ground truth and manifest.

    Writes ``dataset.csv``, ``ground_truth.csv``, and ``manifest.json``
    into ``out_dir`` (created if needed).

    Returns:
        The manifest path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    generated = generate(config)
    write_csv(generated.dataset, out / "dataset.csv")
    export_ground_truth(generated, out / "ground_truth.csv")
    doc = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "tool_version": __version__,
        "synth": asdict(config),
        "dataset": _dataset_doc(generated.dataset),
        "latent": {
            "mean_p_control": float(np.mean(generated.p_control)),
            "mean_p_treated": float(np.mean(generated.p_treated)),
            "mean_true_cate": float(np.mean(generated.true_cate)),
            "base_intercept": generated.base_intercept,
            "lift_intercept": generated.lift_intercept,
            "base_coef": [float(v) for v in generated.base_coef],
            "lift_coef": [float(v) for v in generated.lift_coef],
        },
        "files": {"dataset": "dataset.csv", "ground_truth": "ground_truth.csv"},
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(doc, indent=2) + "\n")
    return manifest_path


def cmd_run(config: ExperimentConfig) -> RunManifest:
    """Run the full comparison pipeline; see :func:`run_experiment`."""
    return run_experiment(config)


def cmd_score(
    model_path: str | Path,
    data_path: str | Path,
    out_path: str | Path,
    treatment_col: str = "w",
    outcome_col: str = "y",
    drop_cols: tuple[str, ...] = (),
) -> None:
    """Score a dataset with a saved model, writing per-row uplift scores.

    The model's loss identifies the target family it was trained on:
    logistic models carry class-transform targets, so their probabilities
    are mapped through ``2 p - 1``; squared-loss models predict uplift
    directly. Output rows align with input rows.

    Raises:
        ModelError: If the dataset schema does not match the model's.
    """
    model = load_model(model_path)
    ds = load_csv(
        data_path,
        treatment_col=treatment_col,
        outcome_col=outcome_col,
        drop_cols=drop_cols,
    )
    if ds.schema.names != model.feature_names:
        raise ModelError(
            f"schema mismatch: model expects {model.n_features} features "
            f"{list(model.feature_names)}, dataset has {ds.schema.n_features} "
            f"{list(ds.schema.names)}"
        )
    raw = predict(model, ds.x)
    kind = "class" if model.loss == "logistic" else "transformed"
    write_scores_csv(uplift_from_prediction(kind, raw), out_path)


def cmd_evaluate(
    scores_path: str | Path,
    data_path: str | Path,
    out_dir: str | Path,
    column: str = "score",
    n_bins: int = 100,
    treatment_col: str = "w",
    outcome_col: str = "y",
    drop_cols: tuple[str, ...] = (),
) -> MetricsReport:
    """Evaluate a score file against a dataset, writing report artifacts.

    Writes ``report.txt``, ``curves.csv``, and the two curve figures into
    ``out_dir``.

    Raises:
        DataError: If score and dataset row counts differ.
    """
    scores = read_column(scores_path, column)
    ds = load_csv(
        data_path,
        treatment_col=treatment_col,
        outcome_col=outcome_col,
        drop_cols=drop_cols,
    )
    if scores.shape[0] != len(ds):
        raise DataError(
            f"{scores.shape[0]} scores for {len(ds)} dataset rows"
        )
    report = evaluate_scores(scores, ds.y, ds.w, n_bins)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_curves_csv(report, out / "curves.csv")
    save_curve_figures(report, out, label="scores")
    stats = arm_stats(ds)
    _write_report_txt(
        out / "report.txt",
        [
            ("scores_file", str(scores_path)),
            ("dataset_file", str(data_path)),
            ("rows", len(ds)),
            ("n_control", stats.n_control),
            ("n_treated", stats.n_treated),
            ("rate_control", stats.rate_control),
            ("rate_treated", stats.rate_treated),
            ("rate_difference", stats.rate_difference),
            ("qini_coefficient", report.qini_coefficient),
            ("auuc", report.auuc),
            *(
                (f"uplift_at_decile_{i + 1}", float(v))
                for i, v in enumerate(report.uplift_at_deciles)
            ),
            ("curves_file", "curves.csv"),
            ("figures", "qini.png uplift.png"),
        ],
    )
    return report
