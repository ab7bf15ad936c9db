from __future__ import annotations

import random

import numpy as np
import pytest

from ragvenom.detector import (
    ForestParams,
    RandomForestModel,
    best_gini_split,
    dedup_indices,
    fit_pipeline,
    infer_schema,
    load_detector,
    load_traffic_csv,
    predict,
    save_detector,
    train_forest,
    transform,
    transform_all,
)
from ragvenom.errors import TrainingError


def _rows(table):
    columns = table[0]
    return [dict(zip(columns, values)) for values in table[1:]]


def test_infer_schema_numeric_versus_categorical():
    rows = _rows([
        ("rate", "proto", "note"),
        ("1.5", "tcp", "10"),
        ("", "udp", "x10"),
        ("2.5", "NaN", "20"),
    ])
    schema = infer_schema(rows, ["rate", "proto", "note"])
    assert schema.kinds == {"rate": "numeric", "proto": "categorical", "note": "categorical"}


def test_dedup_indices_first_occurrence_wins():
    rows = _rows([
        ("a", "b"),
        ("1", "x"),
        ("2", "y"),
        ("1", "x"),
        ("3", "z"),
    ])
    schema = infer_schema(rows, ["a", "b"])
    assert dedup_indices(rows, schema) == [0, 1, 3]


def test_pipeline_imputes_median_and_mode():
    rows = _rows([
        ("rate", "proto"),
        ("1", "tcp"),
        ("3", "udp"),
        ("", "tcp"),
        ("10", ""),
        ("4", "udp"),
    ])
    schema = infer_schema(rows, ["rate", "proto"])
    pipeline = fit_pipeline(rows, schema)
    # median of [1, 3, 10, 4] = (3+4)/2 = 3.5; mode of [tcp, udp, tcp, udp] -> tie -> "tcp"
    assert pipeline.numeric_params["rate"]["median"] == pytest.approx(3.5)
    assert pipeline.categorical_params["proto"]["mode"] == "tcp"
    x_missing = transform(pipeline, {"rate": "", "proto": ""})
    x_explicit = transform(pipeline, {"rate": "3.5", "proto": "tcp"})
    assert np.allclose(x_missing, x_explicit)


def test_pipeline_drops_constant_columns():
    rows = _rows([
        ("rate", "fixed", "proto"),
        ("1", "7", "tcp"),
        ("2", "7", "udp"),
        ("3", "", "tcp"),
    ])
    schema = infer_schema(rows, ["rate", "fixed", "proto"])
    pipeline = fit_pipeline(rows, schema)
    assert pipeline.retained == ("rate", "proto")


def test_pipeline_standardizes_with_population_std():
    rows = _rows([
        ("v", "w"),
        ("1", "10"),
        ("2", "20"),
        ("3", "40"),
        ("4", "70"),
    ])
    schema = infer_schema(rows, ["v", "w"])
    pipeline = fit_pipeline(rows, schema)
    x = transform_all(pipeline, rows)
    assert np.allclose(x.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(x.std(axis=0, ddof=0), 1.0, atol=1e-12)


def test_transform_unseen_category_and_missing_key():
    rows = _rows([
        ("proto", "rate"),
        ("tcp", "1"),
        ("udp", "2"),
    ])
    schema = infer_schema(rows, ["proto", "rate"])
    pipeline = fit_pipeline(rows, schema)
    encoded = transform(pipeline, {"proto": "icmp", "rate": "1"})
    assert encoded[0] == -1.0
    with pytest.raises(TrainingError, match="proto"):
        transform(pipeline, {"rate": "1"})


def test_pipeline_rejects_degenerate_inputs():
    with pytest.raises(TrainingError):
        fit_pipeline([], infer_schema([{"a": "1"}], ["a"]))
    rows = _rows([("a", "b"), ("", "x"), ("", "y")])
    schema = infer_schema(rows, ["a", "b"])
    with pytest.raises(TrainingError, match="'a'"):
        fit_pipeline(rows, schema)


def test_ordinal_codes_follow_sorted_category_order():
    rows = _rows([
        ("proto", "rate"),
        ("udp", "1"),
        ("icmp", "2"),
        ("tcp", "3"),
    ])
    schema = infer_schema(rows, ["proto", "rate"])
    pipeline = fit_pipeline(rows, schema)
    assert pipeline.categorical_params["proto"]["codes"] == {"icmp": 0, "tcp": 1, "udp": 2}


def _exhaustive_best_split(x, y, indices, feature_ids):
    def gini(labels):
        n = len(labels)
        if n == 0:
            return 0.0
        counts = {}
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
        return 1.0 - sum((c / n) ** 2 for c in counts.values())

    best = None
    n = len(indices)
    for f in sorted(feature_ids):
        values = sorted({float(x[i, f]) for i in indices})
        for lo, hi in zip(values, values[1:]):
            threshold = (lo + hi) / 2.0
            if not lo < threshold < hi:
                continue
            left = [y[i] for i in indices if float(x[i, f]) <= threshold]
            right = [y[i] for i in indices if float(x[i, f]) > threshold]
            score = len(left) / n * gini(left) + len(right) / n * gini(right)
            key = (score, f, threshold)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    score, f, threshold = best
    return f, threshold, score


def test_best_gini_split_matches_exhaustive_enumeration():
    # Two classes keep every Gini sum down to two commutative terms, so the
    # incremental and from-scratch scores are bit-identical and tie-breaking
    # can be compared exactly. Rounding forces repeated values and real ties.
    rng = np.random.default_rng(17)
    for _ in range(25):
        n = int(rng.integers(4, 20))
        d = int(rng.integers(1, 5))
        x = np.round(rng.normal(size=(n, d)), 1)
        y = [str(v) for v in rng.integers(0, 2, size=n)]
        indices = list(range(n))
        features = list(range(d))
        assert best_gini_split(x, y, indices, features) == _exhaustive_best_split(x, y, indices, features)


def test_best_gini_split_three_classes_matches_oracle():
    # Continuous values make real-arithmetic ties impossible, so feature and
    # threshold must agree exactly; the score may differ in the last ulp
    # because the oracle sums class terms in a different order.
    rng = np.random.default_rng(23)
    for _ in range(10):
        n = int(rng.integers(6, 20))
        d = int(rng.integers(2, 4))
        x = rng.uniform(size=(n, d))
        y = [str(v) for v in rng.integers(0, 3, size=n)]
        indices = list(range(n))
        features = list(range(d))
        got = best_gini_split(x, y, indices, features)
        want = _exhaustive_best_split(x, y, indices, features)
        assert got is not None and want is not None
        assert got[:2] == want[:2]
        assert got[2] == pytest.approx(want[2], abs=1e-12)


def test_best_gini_split_none_when_no_distinct_values():
    x = np.ones((4, 2))
    y = ["a", "a", "b", "b"]
    assert best_gini_split(x, y, [0, 1, 2, 3], [0, 1]) is None


def test_forest_params_validation():
    with pytest.raises(TrainingError):
        ForestParams(n_trees=0)
    with pytest.raises(TrainingError):
        ForestParams(max_depth=0)
    with pytest.raises(TrainingError):
        ForestParams(min_samples_split=1)
    with pytest.raises(TrainingError):
        ForestParams(features_per_split=0)


def test_train_forest_is_deterministic_and_votes_sum():
    rng = random.Random(5)
    x = np.array([[rng.gauss(0, 1), rng.gauss(0, 1)] for _ in range(40)])
    y = ["pos" if row[0] + row[1] > 0 else "neg" for row in x]
    params = ForestParams(n_trees=15, seed=9)
    first = train_forest(x, y, params)
    second = train_forest(x, y, params)
    assert first.trees == second.trees
    result = predict(first, x[0])
    assert sum(result.votes.values()) == 15
    assert set(result.votes) == {"neg", "pos"}


def test_train_forest_validates_inputs():
    x = np.zeros((3, 2))
    with pytest.raises(TrainingError):
        train_forest(x, ["a", "a"])  # length mismatch
    with pytest.raises(TrainingError):
        train_forest(x, ["a", "a", "a"])  # single class
    with pytest.raises(TrainingError):
        train_forest(np.zeros((1, 2)), ["a"])
    with pytest.raises(TrainingError):
        train_forest(x, ["a", "b", "a"], ForestParams(features_per_split=5))


def test_predict_tie_breaks_to_smallest_label():
    leaf_a = {"leaf": True, "counts": {"alpha": 3}}
    leaf_b = {"leaf": True, "counts": {"beta": 3}}
    model = RandomForestModel(
        trees=[leaf_a, leaf_b],
        classes=("alpha", "beta"),
        n_features=2,
        params=ForestParams(n_trees=2),
    )
    result = predict(model, np.zeros(2))
    assert result.votes == {"alpha": 1, "beta": 1}
    assert result.label == "alpha"


def test_tree_vote_leaf_majority_tie_breaks_lexicographically():
    tree = {"leaf": True, "counts": {"zeta": 2, "alpha": 2, "mid": 1}}
    model = RandomForestModel(
        trees=[tree], classes=("alpha", "mid", "zeta"), n_features=1, params=ForestParams(n_trees=1)
    )
    assert predict(model, np.zeros(1)).label == "alpha"


def test_predict_rejects_wrong_width():
    x = np.array([[0.0, 1.0], [1.0, 0.0], [0.5, 0.2], [0.1, 0.9]])
    model = train_forest(x, ["a", "b", "b", "a"], ForestParams(n_trees=3))
    with pytest.raises(TrainingError):
        predict(model, np.zeros(3))


def test_load_traffic_csv_fixture(fixtures_dir):
    rows, labels, columns = load_traffic_csv(fixtures_dir / "traffic.csv")
    assert columns == ["fwd_rate", "mean_size", "proto"]
    assert len(rows) == len(labels) == 92
    assert set(labels) == {"benign", "flood"}
    assert any(row["fwd_rate"] == "" for row in rows)  # injected missing cells survive


def test_detector_round_trip_on_fixture_traffic(tmp_path, fixtures_dir):
    rows, labels, columns = load_traffic_csv(fixtures_dir / "traffic.csv")
    schema = infer_schema(rows, columns)
    keep = dedup_indices(rows, schema)
    rows = [rows[i] for i in keep]
    y = [str(labels[i]) for i in keep]
    pipeline = fit_pipeline(rows, schema)
    model = train_forest(transform_all(pipeline, rows), y, ForestParams(n_trees=20, seed=3))
    path = tmp_path / "detector.json"
    save_detector(pipeline, model, path)
    loaded_pipeline, loaded_model = load_detector(path)
    for row in rows[:10]:
        a = predict(model, transform(pipeline, row))
        b = predict(loaded_model, transform(loaded_pipeline, row))
        assert a.label == b.label and a.votes == b.votes
