"""Command-line entry point.

Four subcommands cover the pipeline: ``synth`` writes a generated dataset
with its ground truth, ``run`` executes a config-driven transform
comparison, ``score`` applies a saved model to a dataset, and ``evaluate``
turns a score file into metric reports. Failures exit nonzero with a
category-tagged message on stderr; the category-to-exit-code table lives
in :data:`EXIT_CODES`.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import ConfigError, UpliftError
from .experiment import (
    PRESETS,
    cmd_evaluate,
    cmd_run,
    cmd_score,
    cmd_synth,
    parse_config,
    parse_synth_config,
    set_override,
)

EXIT_CODES = {
    "config": 2,
    "data": 3,
    "propensity": 4,
    "transform": 5,
    "calibration": 6,
    "model": 7,
    "metric": 8,
}
_IO_EXIT_CODE = 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="upliftkit",
        description="Uplift modeling via outcome transforms: generate, "
        "train, score, evaluate.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser(
        "synth", help="generate a synthetic dataset with known effects"
    )
    synth.add_argument(
        "--preset",
        choices=sorted(PRESETS),
        help="named generator preset; overridable with --set",
    )
    synth.add_argument("--config", help="JSON file with generator parameters")
    synth.add_argument("--seed", type=int, help="generator seed (default 0)")
    synth.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one generator key, e.g. --set n_per_arm=500",
    )
    synth.add_argument("--out", required=True, help="output directory")
    synth.set_defaults(handler=_handle_synth)

    run = sub.add_parser("run", help="run a config-driven transform comparison")
    run.add_argument("--config", required=True, help="JSON experiment config")
    run.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override one config key, e.g. --set learner.n_trees=50",
    )
    run.add_argument("--out", help="output directory (overrides the config)")
    run.set_defaults(handler=_handle_run)

    score = sub.add_parser("score", help="score a dataset with a saved model")
    score.add_argument("--model", required=True, help="model JSON file")
    score.add_argument("--data", required=True, help="dataset CSV")
    score.add_argument("--out", required=True, help="output scores CSV")
    _add_column_flags(score)
    score.set_defaults(handler=_handle_score)

    evaluate = sub.add_parser(
        "evaluate", help="compute metrics for a score file against a dataset"
    )
    evaluate.add_argument("--scores", required=True, help="scores CSV")
    evaluate.add_argument(
        "--column", default="score", help="score column name (default: score)"
    )
    evaluate.add_argument("--data", required=True, help="dataset CSV")
    evaluate.add_argument("--out", required=True, help="output directory")
    evaluate.add_argument(
        "--n-bins", type=int, default=100, help="curve resolution (default: 100)"
    )
    _add_column_flags(evaluate)
    evaluate.set_defaults(handler=_handle_evaluate)

    return parser


def _add_column_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument(
        "--treatment-col", default="w", help="treatment column name (default: w)"
    )
    sub.add_argument(
        "--outcome-col", default="y", help="outcome column name (default: y)"
    )
    sub.add_argument(
        "--drop",
        action="append",
        default=[],
        metavar="COLUMN",
        help="ignore this dataset column (repeatable)",
    )


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.handler(args)
    except UpliftError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return EXIT_CODES.get(exc.category, 1)
    except OSError as exc:
        print(f"error [io]: {exc}", file=sys.stderr)
        return _IO_EXIT_CODE
    return 0


def _load_json(path: str) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path} must hold a JSON object")
    return doc


def _apply_overrides(doc: dict, assignments: list[str]) -> None:
    for assignment in assignments:
        key, sep, value = assignment.partition("=")
        if not sep:
            raise ConfigError(f"--set needs KEY=VALUE, got {assignment!r}")
        set_override(doc, key, value)


def _handle_synth(args: argparse.Namespace) -> None:
    if args.preset is None and args.config is None:
        raise ConfigError("synth needs --preset or --config")
    doc = _load_json(args.config) if args.config else {}
    if args.preset is not None:
        doc["preset"] = args.preset
    _apply_overrides(doc, args.set)
    if args.seed is not None:
        doc["seed"] = args.seed
    config, _ = parse_synth_config(doc)
    manifest_path = cmd_synth(config, args.out)
    print(manifest_path)


def _handle_run(args: argparse.Namespace) -> None:
    doc = _load_json(args.config)
    _apply_overrides(doc, args.set)
    if args.out is not None:
        doc["output_dir"] = str(Path(args.out).absolute())
    config = parse_config(doc, base_dir=Path(args.config).parent)
    manifest = cmd_run(config)
    for row in manifest.comparison:
        if row["qini_mean"] is None:
            print(f"{row['approach']}: failed in all repetitions")
            continue
        print(
            f"{row['approach']}: qini {row['qini_mean']:.4f} "
            f"[{row['qini_min']:.4f}, {row['qini_max']:.4f}]  "
            f"auuc {row['auuc_mean']:.6f}"
        )
    print(config.output_dir / "manifest.json")


def _handle_score(args: argparse.Namespace) -> None:
    cmd_score(
        args.model,
        args.data,
        args.out,
        treatment_col=args.treatment_col,
        outcome_col=args.outcome_col,
        drop_cols=tuple(args.drop),
    )
    print(args.out)


def _handle_evaluate(args: argparse.Namespace) -> None:
    report = cmd_evaluate(
        args.scores,
        args.data,
        args.out,
        column=args.column,
        n_bins=args.n_bins,
        treatment_col=args.treatment_col,
        outcome_col=args.outcome_col,
        drop_cols=tuple(args.drop),
    )
    print(f"qini {report.qini_coefficient:.4f}  auuc {report.auuc:.6f}")
    print(Path(args.out) / "report.txt")


if __name__ == "__main__":
    sys.exit(main())
