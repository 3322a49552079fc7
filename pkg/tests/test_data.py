from __future__ import annotations

import numpy as np
import pytest

from upliftkit.data import (
    ArmStats,
    Dataset,
    FeatureSchema,
    arm_stats,
    content_digest,
    load_csv,
    read_column,
    split,
    split_indices,
    write_csv,
)
from upliftkit.errors import DataError

from conftest import DatasetBuilder


def test_schema_rejects_empty_name_list() -> None:
    with pytest.raises(DataError, match="at least one feature"):
        FeatureSchema(())


def test_schema_rejects_blank_and_duplicate_names() -> None:
    with pytest.raises(DataError, match="non-empty"):
        FeatureSchema(("a", ""))
    with pytest.raises(DataError, match="unique"):
        FeatureSchema(("a", "b", "a"))


def test_schema_index_of_finds_position_and_rejects_unknown() -> None:
    schema = FeatureSchema(("age", "balance"))
    assert schema.n_features == 2
    assert schema.index_of("balance") == 1
    with pytest.raises(DataError, match="unknown feature 'tenure'"):
        schema.index_of("tenure")


def test_dataset_coerces_and_freezes_arrays(build_dataset: DatasetBuilder) -> None:
    ds = build_dataset([[1.0, 2.0]], w=[1], y=[0])
    assert ds.x.dtype == np.float64
    assert ds.w.dtype == np.int8
    assert ds.y.dtype == np.int8
    with pytest.raises(ValueError):
        ds.x[0, 0] = 9.0
    with pytest.raises(ValueError):
        ds.w[0] = 0


def test_dataset_allows_zero_rows(build_dataset: DatasetBuilder) -> None:
    ds = build_dataset(np.empty((0, 2)), w=[], y=[])
    assert len(ds) == 0


def test_dataset_rejects_bad_shapes_and_domains() -> None:
    schema = FeatureSchema(("a", "b"))
    good_x = np.zeros((2, 2))
    with pytest.raises(DataError, match="2-d"):
        Dataset(schema, np.zeros(2), np.array([0, 1]), np.array([0, 1]))
    with pytest.raises(DataError, match="columns"):
        Dataset(schema, np.zeros((2, 3)), np.array([0, 1]), np.array([0, 1]))
    with pytest.raises(DataError, match="finite"):
        Dataset(schema, np.array([[np.nan, 0.0]]), np.array([1]), np.array([0]))
    with pytest.raises(DataError, match="w values"):
        Dataset(schema, good_x, np.array([0, 2]), np.array([0, 1]))
    with pytest.raises(DataError, match="y values"):
        Dataset(schema, good_x, np.array([0, 1]), np.array([0, -1]))
    with pytest.raises(DataError, match="shape"):
        Dataset(schema, good_x, np.array([0, 1, 1]), np.array([0, 1]))


def test_sample_and_subset_preserve_row_content(
    build_dataset: DatasetBuilder,
) -> None:
    ds = build_dataset([[1.0], [2.0], [3.0]], w=[0, 1, 0], y=[1, 0, 1])
    row = ds.sample(1)
    assert row.w == 1 and row.y == 0
    assert row.x[0] == 2.0
    sub = ds.subset(np.array([2, 0]))
    assert len(sub) == 2
    assert sub.x[:, 0].tolist() == [3.0, 1.0]
    assert sub.schema is ds.schema
    with pytest.raises(DataError, match="1-d"):
        ds.subset(np.array([[0]]))


def test_arm_stats_matches_constructed_counts(build_dataset: DatasetBuilder) -> None:
    w = [0] * 6 + [1] * 4
    y = [1, 1, 0, 0, 0, 0, 1, 1, 1, 0]
    stats = arm_stats(build_dataset(np.zeros((10, 1)), w=w, y=y))
    assert stats == ArmStats(
        n_control=6, n_treated=4, positives_control=2, positives_treated=3
    )
    assert stats.n_total == 10
    assert stats.rate_control == pytest.approx(1 / 3)
    assert stats.rate_treated == pytest.approx(0.75)
    assert stats.rate_difference == pytest.approx(0.75 - 1 / 3)
    assert stats.treated_fraction == pytest.approx(0.4)


def test_arm_stats_single_arm_reports_present_arm_only(
    build_dataset: DatasetBuilder,
) -> None:
    stats = arm_stats(build_dataset([[0.0]], w=[0], y=[1]))
    assert stats.rate_control == 1.0
    assert stats.n_treated == 0
    assert stats.rate_treated is None
    assert stats.rate_difference is None


def test_arm_stats_rejects_empty_dataset(build_dataset: DatasetBuilder) -> None:
    ds = build_dataset(np.empty((0, 1)), w=[], y=[])
    with pytest.raises(DataError, match="at least one row"):
        arm_stats(ds)


def test_content_digest_tracks_values_and_names(
    build_dataset: DatasetBuilder,
) -> None:
    ds = build_dataset([[1.0], [2.0]], w=[0, 1], y=[1, 0])
    twin = build_dataset([[1.0], [2.0]], w=[0, 1], y=[1, 0])
    assert content_digest(ds) == content_digest(twin)
    flipped = build_dataset([[1.0], [2.0]], w=[0, 1], y=[1, 1])
    assert content_digest(ds) != content_digest(flipped)
    renamed = build_dataset([[1.0], [2.0]], w=[0, 1], y=[1, 0], names=("g1",))
    assert content_digest(ds) != content_digest(renamed)


def test_load_csv_parses_named_columns(tmp_path) -> None:
    path = tmp_path / "one.csv"
    path.write_text("x1,x2,treatment,outcome\n0.5,1.2,1,0\n")
    ds = load_csv(path, treatment_col="treatment", outcome_col="outcome")
    assert len(ds) == 1
    assert ds.schema.names == ("x1", "x2")
    assert ds.x[0].tolist() == [0.5, 1.2]
    assert int(ds.w[0]) == 1 and int(ds.y[0]) == 0


def test_load_csv_header_only_gives_empty_dataset(tmp_path) -> None:
    path = tmp_path / "empty.csv"
    path.write_text("a,w,y\n")
    ds = load_csv(path)
    assert len(ds) == 0
    assert ds.schema.names == ("a",)


def test_load_csv_errors_name_the_problem(tmp_path) -> None:
    missing = tmp_path / "missing.csv"
    missing.write_text("a,b\n1,2\n")
    with pytest.raises(DataError, match="w"):
        load_csv(missing)

    empty = tmp_path / "zero.csv"
    empty.write_text("")
    with pytest.raises(DataError, match="empty"):
        load_csv(empty)

    bad_outcome = tmp_path / "bad_y.csv"
    bad_outcome.write_text("a,w,y\n1.0,0,0\n2.0,1,2\n")
    with pytest.raises(DataError, match="3"):
        load_csv(bad_outcome)

    bad_feature = tmp_path / "bad_x.csv"
    bad_feature.write_text("a,w,y\noops,0,0\n")
    with pytest.raises(DataError, match="2"):
        load_csv(bad_feature)


def test_load_csv_drop_cols_removes_columns(tmp_path) -> None:
    path = tmp_path / "extra.csv"
    path.write_text("a,note,w,y\n1.0,free text,0,1\n")
    ds = load_csv(path, drop_cols=("note",))
    assert ds.schema.names == ("a",)
    assert int(ds.y[0]) == 1


def test_csv_round_trip_is_exact(tmp_path, build_dataset: DatasetBuilder) -> None:
    rng = np.random.default_rng(5)
    x = rng.standard_normal((17, 3)) * np.array([1.0, 1e-8, 1e12])
    w = rng.integers(0, 2, size=17)
    y = rng.integers(0, 2, size=17)
    ds = build_dataset(x, w=w, y=y, names=("a", "b", "c"))
    path = tmp_path / "round.csv"
    write_csv(ds, path)
    back = load_csv(path)
    assert back.schema.names == ds.schema.names
    assert np.array_equal(back.x, ds.x)
    assert np.array_equal(back.w, ds.w)
    assert np.array_equal(back.y, ds.y)


def test_read_column_returns_values_in_file_order(tmp_path) -> None:
    path = tmp_path / "scores.csv"
    path.write_text("score\n0.25\n-1.5\n3.0\n")
    assert read_column(path, "score").tolist() == [0.25, -1.5, 3.0]
    with pytest.raises(DataError, match="score2"):
        read_column(path, "score2")


def test_split_indices_partitions_exactly() -> None:
    rng = np.random.default_rng(0)
    w = rng.integers(0, 2, size=100)
    y = rng.integers(0, 2, size=100)
    train, test = split_indices(w, y, 0.2, seed=7)
    assert len(train) + len(test) == 100
    assert np.intersect1d(train, test).size == 0
    assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(100))
    assert np.all(np.diff(train) > 0)
    assert np.all(np.diff(test) > 0)


def test_split_indices_is_deterministic_per_seed() -> None:
    rng = np.random.default_rng(1)
    w = rng.integers(0, 2, size=60)
    y = rng.integers(0, 2, size=60)
    first = split_indices(w, y, 0.25, seed=3)
    second = split_indices(w, y, 0.25, seed=3)
    assert np.array_equal(first[0], second[0])
    assert np.array_equal(first[1], second[1])
    other = split_indices(w, y, 0.25, seed=4)
    assert not np.array_equal(first[1], other[1])


def test_split_indices_balanced_cells_get_exact_counts() -> None:
    w = np.repeat([0, 0, 1, 1], 25)
    y = np.concatenate([np.zeros(25), np.ones(25), np.zeros(25), np.ones(25)])
    train, test = split_indices(w, y, 0.2, seed=11)
    assert len(test) == 20
    for w_val in (0, 1):
        for y_val in (0, 1):
            in_cell = (w[test] == w_val) & (y[test] == y_val)
            assert int(in_cell.sum()) == 5


def test_split_indices_keeps_cell_proportions_within_one() -> None:
    rng = np.random.default_rng(2)
    w = rng.integers(0, 2, size=237)
    y = (rng.random(237) < 0.3).astype(int)
    fraction = 0.3
    _, test = split_indices(w, y, fraction, seed=5)
    for w_val in (0, 1):
        for y_val in (0, 1):
            cell = int(((w == w_val) & (y == y_val)).sum())
            got = int(((w[test] == w_val) & (y[test] == y_val)).sum())
            assert abs(got - cell * fraction) <= 0.5


def test_split_indices_rejects_bad_fractions_and_empty_input() -> None:
    w = np.array([0, 1, 0, 1])
    y = np.array([0, 0, 1, 1])
    for bad in (0.0, 1.0, -0.1, 1.5):
        with pytest.raises(DataError, match="test_fraction"):
            split_indices(w, y, bad, seed=0)
    with pytest.raises(DataError, match="empty"):
        split_indices(np.empty(0), np.empty(0), 0.5, seed=0)
    with pytest.raises(DataError, match="empty part"):
        split_indices(w, y, 0.05, seed=0)


def test_split_single_arm_passes_through(build_dataset: DatasetBuilder) -> None:
    ds = build_dataset(np.arange(20.0), w=[1] * 20, y=[0, 1] * 10)
    train, test = split(ds, 0.2, seed=0)
    assert len(train) == 16 and len(test) == 4
    assert set(test.w.tolist()) == {1}


def test_split_datasets_share_schema_and_cover_rows(
    build_dataset: DatasetBuilder,
) -> None:
    rng = np.random.default_rng(9)
    ds = build_dataset(
        rng.standard_normal((40, 2)),
        w=rng.integers(0, 2, size=40),
        y=rng.integers(0, 2, size=40),
    )
    train, test = split(ds, 0.25, seed=1)
    assert train.schema is ds.schema and test.schema is ds.schema
    combined = np.sort(np.concatenate([train.x[:, 0], test.x[:, 0]]))
    assert np.array_equal(combined, np.sort(ds.x[:, 0]))
