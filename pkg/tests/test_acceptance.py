"""End-to-end acceptance checks.

Each test covers one numbered criterion from the build contract and prints
a single ``criterion N (...): PASS/FAIL`` line with measured values, so a
full run reads as a checklist. Tolerances are asserted exactly as stated;
where a comparison is statistical, the fixture seed is fixed and the
companion decision ledger records the sensitivity analysis.
"""

from __future__ import annotations

import itertools
import statistics
import warnings
from pathlib import Path

import numpy as np
import pytest
from oracles import (
    curve_bruteforce,
    exhaustive_root_split,
    logistic_loss_scalar,
    optimal_order_bruteforce,
    phi_from_table,
    qini_coefficient_bruteforce,
    squared_loss_scalar,
    central_difference,
    vectors_from_table,
)

from upliftkit.data import Dataset, FeatureSchema, arm_stats
from upliftkit.errors import MetricError
from upliftkit.experiment import parse_config, run_experiment
from upliftkit.gbt import TrainConfig, fit, loss_gradient, predict
from upliftkit.metrics import (
    phi_correlation,
    qini_coefficient,
    qini_curve,
    uplift_curve_and_auuc,
)
from upliftkit.propensity import estimate_constant
from upliftkit.synthgen import SynthConfig, generate
from upliftkit.transforms import (
    class_transform,
    shifted_transformed_outcome,
    transformed_outcome,
)


def conclude(number: int, label: str, ok: bool, detail: str) -> None:
    line = f"criterion {number} ({label}): {'PASS' if ok else 'FAIL'} - {detail}"
    print(line)
    assert ok, line


def preset_run_doc(preset: str, out_dir: Path) -> dict:
    return {
        "data": {"preset": preset},
        "transforms": [
            {"kind": "class"},
            {"kind": "transformed"},
            {"kind": "shifted"},
        ],
        "output_dir": str(out_dir),
    }


def qini_by_approach(manifest: dict) -> dict[str, list[float]]:
    return {
        a["name"]: [r["metrics"]["qini_coefficient"] for r in a["repetitions"]]
        for a in manifest["approaches"]
    }


def test_criterion_1_transform_cells() -> None:
    one = np.array([1.0])
    zero = np.array([0.0])
    # Class label is 1 exactly when treatment and outcome agree.
    class_cells = [
        ((1, 1), 1.0),
        ((0, 0), 1.0),
        ((1, 0), 0.0),
        ((0, 1), 0.0),
    ]
    class_ok = all(
        class_transform(np.array([y]), np.array([w]))[0] == z
        for (w, y), z in class_cells
    )

    tol = 1e-12
    worst = 0.0
    checks = 0
    for p in (0.25, 0.5, 0.75148):
        pa = np.array([p])
        for shift in (0.0, 0.3, 0.5, 1.0):
            # Closed forms of (y - C)(w - p) / (p (1 - p)) per (w, y) cell.
            expected = {
                (1, 1): (1.0 - shift) / p,
                (0, 0): shift / (1.0 - p),
                (1, 0): -shift / p,
                (0, 1): -(1.0 - shift) / (1.0 - p),
            }
            for (w, y), target in expected.items():
                ya = one if y else zero
                wa = one if w else zero
                got = shifted_transformed_outcome(ya, wa, pa, shift)[0]
                worst = max(worst, abs(got - target))
                checks += 1
                if shift == 0.0:
                    worst = max(
                        worst, abs(transformed_outcome(ya, wa, pa)[0] - target)
                    )
    conclude(
        1,
        "transform cells",
        class_ok and worst <= tol,
        f"4 class cells exact, {checks} weighted cells within {worst:.2e}"
        f" (tolerance {tol})",
    )


def test_criterion_2_conditional_expectation_is_shift_invariant() -> None:
    config = SynthConfig(
        n_per_arm=25_000,
        target_control_rate=0.3,
        target_treated_rate=0.5,
        seed=0,
    )
    generated = generate(config)
    ds = generated.dataset
    assert len(ds) >= 50_000
    p = float(ds.w.mean())
    order = np.argsort(generated.true_cate, kind="stable")
    cells = np.array_split(order, 10)

    worst_ratio = 0.0
    for shift in (0.0, 0.25, 0.5, 0.75):
        z = shifted_transformed_outcome(ds.y, ds.w, np.full(len(ds), p), shift)
        for cell in cells:
            gap = abs(float(z[cell].mean()) - float(generated.true_cate[cell].mean()))
            stderr = float(z[cell].std(ddof=1)) / np.sqrt(cell.size)
            worst_ratio = max(worst_ratio, gap / stderr)
    conclude(
        2,
        "conditional expectation",
        worst_ratio <= 3.0,
        f"40 cell checks over 50000 rows, worst gap {worst_ratio:.2f}"
        " standard errors (limit 3)",
    )


def test_criterion_3_contingency_correlations() -> None:
    # Joint (treatment, class label) counts for the two benchmark regimes.
    cases = [
        ((5021, 6962, 4979, 3038), -0.198),
        ((784, 9447, 9216, 553), -0.867),
    ]
    details = []
    ok = True
    for counts, target in cases:
        a, b = vectors_from_table(*counts)
        got = phi_correlation(np.array(a), np.array(b))
        oracle = phi_from_table(*counts)
        ok = ok and abs(got - target) <= 1e-3 and abs(got - oracle) <= 1e-12
        details.append(f"{got:.4f} vs {target}")
    conclude(3, "phi correlation", ok, "; ".join(details) + " (tolerance 0.001)")


def test_criterion_4_preset_response_rates() -> None:
    targets = {
        "table3-high": (0.3038, 0.5021),
        "table3-low": (0.0553, 0.0784),
    }
    details = []
    ok = True
    for preset, (control, treated) in targets.items():
        config = SynthConfig(
            n_per_arm=10_000,
            target_control_rate=control,
            target_treated_rate=treated,
            seed=0,
        )
        ds = generate(config).dataset
        got_c = float(ds.y[ds.w == 0].mean())
        got_t = float(ds.y[ds.w == 1].mean())
        ok = ok and abs(got_c - control) <= 5e-3 and abs(got_t - treated) <= 5e-3
        details.append(
            f"{preset}: control {got_c:.4f}/{control}, treated {got_t:.4f}/{treated}"
        )
    conclude(4, "preset calibration", ok, "; ".join(details) + " (tolerance 0.005)")


def test_criterion_5_transform_ordering_on_presets(tmp_path: Path) -> None:
    low = run_experiment(
        parse_config(preset_run_doc("table3-low", tmp_path / "low"), "/")
    ).to_dict()
    high = run_experiment(
        parse_config(preset_run_doc("table3-high", tmp_path / "high"), "/")
    ).to_dict()

    low_q = qini_by_approach(low)
    med = {name: statistics.median(vals) for name, vals in low_q.items()}
    low_order_ok = med["shifted-auto"] >= med["transformed"]
    low_degraded_ok = (
        med["transformed"] > med["class"] and med["class"] <= 0.75 * med["transformed"]
    )

    high_q = qini_by_approach(high)
    wins = sum(
        s >= t for s, t in zip(high_q["shifted-auto"], high_q["transformed"])
    )
    high_ok = wins >= 3

    detail = (
        f"low medians class/transformed/shifted {med['class']:.4f}/"
        f"{med['transformed']:.4f}/{med['shifted-auto']:.4f} "
        f"(shifted>=transformed: {bool(low_order_ok)}, class markedly below: "
        f"{bool(low_degraded_ok)}); high preset shifted>=transformed in "
        f"{wins}/5 repetitions (need 3)"
    )
    conclude(
        5,
        "transform ordering",
        bool(low_order_ok and low_degraded_ok and high_ok),
        detail,
    )


def test_criterion_6_zero_shift_run_reduces_to_unshifted(tmp_path: Path) -> None:
    doc = {
        "data": {
            "synth": {
                "n_per_arm": 1500,
                "target_control_rate": 0.3,
                "target_treated_rate": 0.5,
            }
        },
        "transforms": [{"kind": "shifted", "shift": [0.0]}, {"kind": "transformed"}],
        "learner": {"n_trees": 20, "max_depth": 3, "min_samples_leaf": 20},
        "n_repetitions": 2,
        "output_dir": str(tmp_path / "out"),
    }
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        manifest = run_experiment(parse_config(doc, "/")).to_dict()
    approaches = {a["name"]: a for a in manifest["approaches"]}
    worst = 0.0
    for rep_a, rep_b in zip(
        approaches["shifted-0"]["repetitions"],
        approaches["transformed"]["repetitions"],
    ):
        ma, mb = rep_a["metrics"], rep_b["metrics"]
        worst = max(worst, abs(ma["qini_coefficient"] - mb["qini_coefficient"]))
        worst = max(worst, abs(ma["auuc"] - mb["auuc"]))
        for da, db in zip(ma["uplift_at_deciles"], mb["uplift_at_deciles"]):
            worst = max(worst, abs(da - db))
    scores_a = (tmp_path / "out" / "rep0" / "shifted-0" / "scores.csv").read_bytes()
    scores_b = (tmp_path / "out" / "rep0" / "transformed" / "scores.csv").read_bytes()
    conclude(
        6,
        "zero-shift identity",
        worst <= 1e-12 and scores_a == scores_b,
        f"report gap {worst:.2e} across 2 repetitions (tolerance 1e-12), "
        "scores byte-identical",
    )


def test_criterion_7_metric_oracles() -> None:
    rng = np.random.default_rng(2024)
    curves = 0
    coefficients = 0
    exact = True

    def compare(scores: list[float], y: list[int], w: list[int], n_bins: int) -> None:
        nonlocal curves, coefficients, exact
        s = np.asarray(scores, dtype=np.float64)
        ya = np.asarray(y)
        wa = np.asarray(w)
        _, got_q = qini_curve(s, ya, wa, n_bins=n_bins)
        _, exp_q = curve_bruteforce(scores, y, w, n_bins, "qini")
        _, got_u, _ = uplift_curve_and_auuc(s, ya, wa, n_bins=n_bins)
        _, exp_u = curve_bruteforce(scores, y, w, n_bins, "uplift")
        exact = exact and got_q.tolist() == exp_q and got_u.tolist() == exp_u
        curves += 2
        try:
            got_c = qini_coefficient(s, ya, wa, n_bins=n_bins)
        except MetricError:
            return
        exp_c = qini_coefficient_bruteforce(scores, y, w, n_bins)
        exact = exact and abs(got_c - exp_c) <= 1e-12
        coefficients += 1

    for n in range(2, 7):
        for _ in range(3):
            w = rng.integers(0, 2, size=n).tolist()
            w[0], w[-1] = 1, 0
            y = rng.integers(0, 2, size=n).tolist()
            base = list(range(n, 0, -1))
            for perm in itertools.permutations(range(n)):
                compare([float(base[i]) for i in perm], y, w, n)

    for n in range(7, 13):
        for _ in range(2):
            w = rng.integers(0, 2, size=n).tolist()
            w[0], w[-1] = 1, 0
            y = rng.integers(0, 2, size=n).tolist()
            for _ in range(60):
                scores = rng.permutation(n).astype(np.float64).tolist()
                compare(scores, y, w, n)

    # A ranking that hits the best achievable curve scores exactly 1.
    y_opt = rng.integers(0, 2, size=100)
    w_opt = rng.integers(0, 2, size=100)
    w_opt[0], w_opt[1] = 1, 0
    order = optimal_order_bruteforce(y_opt.tolist(), w_opt.tolist())
    opt_scores = np.empty(100)
    opt_scores[order] = np.arange(100, 0, -1)
    optimal_gap = abs(qini_coefficient(opt_scores, y_opt, w_opt) - 1.0)

    null = generate(
        SynthConfig(
            n_per_arm=10_000,
            target_control_rate=0.35,
            target_treated_rate=0.35,
            seed=11,
        )
    ).dataset
    null_coef = qini_coefficient(
        np.random.default_rng(12).normal(size=len(null)), null.y, null.w
    )

    ok = exact and optimal_gap <= 1e-12 and abs(null_coef) < 0.05
    conclude(
        7,
        "metric oracles",
        ok,
        f"{curves} curves and {coefficients} coefficients match brute force "
        f"exactly; optimal ranking off by {optimal_gap:.1e}; random scores on "
        f"20000 null-effect rows give {null_coef:+.4f} (limit 0.05)",
    )


def test_criterion_8_learner_checks() -> None:
    rng = np.random.default_rng(77)

    worst_rel = 0.0
    for loss, scalar in (("squared", squared_loss_scalar), ("logistic", logistic_loss_scalar)):
        raws = rng.uniform(-4.0, 4.0, size=20)
        targets = (
            rng.integers(0, 2, size=20).astype(np.float64)
            if loss == "logistic"
            else rng.uniform(-3.0, 3.0, size=20)
        )
        g, _ = loss_gradient(loss, raws, targets)
        for i in range(20):
            numeric = central_difference(lambda r: scalar(r, targets[i]), raws[i])
            worst_rel = max(worst_rel, abs(g[i] - numeric) / max(abs(numeric), 1e-12))
    gradients_ok = worst_rel < 1e-6

    splits_ok = True
    for seed in range(4):
        srng = np.random.default_rng(seed)
        x = np.round(srng.normal(size=(200, 3)), 2)
        t = np.round(srng.normal(size=200), 2)
        for min_leaf in (1, 5, 20):
            config = TrainConfig(
                n_trees=1, max_depth=1, learning_rate=1.0, min_samples_leaf=min_leaf
            )
            tree = fit(x, t, config).trees[0]
            expected = exhaustive_root_split(
                x.tolist(),
                (t.mean() - t).tolist(),
                [1.0] * 200,
                config.l2_reg,
                min_leaf,
            )
            assert expected is not None
            splits_ok = splits_ok and tree.feature[0] == expected[1]
            splits_ok = splits_ok and abs(tree.threshold[0] - expected[2]) <= 1e-12

    x = rng.normal(size=(400, 4))
    t = x[:, 0] - 0.5 * x[:, 2] + 0.3 * rng.normal(size=400)
    monotone_ok = True
    models = {}
    for n_jobs in (1, 2, 8):
        config = TrainConfig(n_trees=30, max_depth=3, min_samples_leaf=10, n_jobs=n_jobs)
        model = fit(x, t, config)
        models[n_jobs] = model
        losses = np.asarray(model.train_losses)
        monotone_ok = monotone_ok and bool(np.all(np.diff(losses) <= 1e-12))
    threads_ok = all(
        np.array_equal(predict(models[1], x), predict(models[j], x))
        and all(
            np.array_equal(ta.threshold, tb.threshold)
            and np.array_equal(ta.value, tb.value)
            and np.array_equal(ta.feature, tb.feature)
            for ta, tb in zip(models[1].trees, models[j].trees)
        )
        for j in (2, 8)
    )

    conclude(
        8,
        "learner checks",
        gradients_ok and splits_ok and monotone_ok and threads_ok,
        f"gradient rel err {worst_rel:.1e} over 40 points (limit 1e-6); "
        "12 root splits match exhaustive search; training loss "
        "non-increasing; models bit-identical for 1/2/8 threads",
    )


def test_criterion_9_campaign_arithmetic_fixtures() -> None:
    # Published two-arm campaign counts: 80042 control rows with 480
    # conversions, 26470 treated rows with 261 conversions.
    n_control, pos_control = 80_042, 480
    n_treated, pos_treated = 26_470, 261
    n = n_control + n_treated
    x = np.zeros((n, 1))
    w = np.concatenate([np.zeros(n_control, dtype=np.int8), np.ones(n_treated, dtype=np.int8)])
    y = np.zeros(n, dtype=np.int8)
    y[:pos_control] = 1
    y[n_control : n_control + pos_treated] = 1
    ds = Dataset(FeatureSchema(("f1",)), x, w, y)

    stats = arm_stats(ds)
    prop = estimate_constant(ds)
    ok = (
        prop.p == pytest.approx(0.24852, abs=5e-6)
        and stats.rate_control == pytest.approx(0.005997, abs=5e-7)
        and stats.rate_treated == pytest.approx(0.009860, abs=5e-7)
    )
    conclude(
        9,
        "campaign fixtures",
        ok,
        f"treated share {prop.p:.5f} (expected 0.24852), control rate "
        f"{stats.rate_control:.6f} (expected 0.005997), treated rate "
        f"{stats.rate_treated:.6f} (expected 0.009860)",
    )
