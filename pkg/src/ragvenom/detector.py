"""Tabular attack detection: preprocessing pipeline + random forest.

The detector stands upstream of the RAG pipeline: its predicted label is
what keys knowledge-base retrieval. Preprocessing deduplicates rows, imputes
missing values, drops constant columns, ordinal-encodes categoricals, and
z-scores numerics. The forest is built from scratch: bootstrapped trees with
greedy Gini splits over a random feature subset per split, majority vote
with lexicographic tie-breaks. Everything is seeded and deterministic.
"""

from __future__ import annotations

import csv
import json
import math
import random
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import TrainingError

FORMAT_VERSION = 1

#: Cell values treated as missing in traffic CSVs.
MISSING_VALUES = ("", "NA", "NaN", "nan")


@dataclass(frozen=True)
class Schema:
    """Column names in order, each marked numeric or categorical."""

    columns: tuple[str, ...]
    kinds: dict[str, str]  # column -> "numeric" | "categorical"

    def __post_init__(self) -> None:
        for col in self.columns:
            if self.kinds.get(col) not in ("numeric", "categorical"):
                raise TrainingError(f"column {col!r} has no valid kind in schema")


def is_missing(value: str | None) -> bool:
    return value is None or value.strip() in MISSING_VALUES


def infer_schema(rows: list[dict[str, str]], feature_columns: list[str]) -> Schema:
    """Mark a column numeric when every present value parses as a float."""
    if not rows:
        raise TrainingError("cannot infer a schema from zero rows")
    kinds: dict[str, str] = {}
    for col in feature_columns:
        numeric = True
        for row in rows:
            value = row.get(col)
            if is_missing(value):
                continue
            try:
                float(value)
            except ValueError:
                numeric = False
                break
        kinds[col] = "numeric" if numeric else "categorical"
    return Schema(columns=tuple(feature_columns), kinds=kinds)


@dataclass
class PreprocessPipeline:
    """Fitted per-column parameters; transform never re-estimates them."""

    schema: Schema
    retained: tuple[str, ...]
    numeric_params: dict[str, dict[str, float]]  # col -> {median, mean, std}
    categorical_params: dict[str, dict]  # col -> {mode, codes: {category -> code}}
    fitted: bool = True


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def _mode(values: list[str]) -> str:
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def dedup_indices(rows: list[dict[str, str]], schema: Schema) -> list[int]:
    """Indices of the first occurrence of each distinct feature tuple.

    Duplicates are judged on the feature columns only, so rows that differ
    just in their label still collapse to the first one seen.
    """
    seen: set[tuple] = set()
    keep: list[int] = []
    for idx, row in enumerate(rows):
        key = tuple(row.get(col) for col in schema.columns)
        if key in seen:
            continue
        seen.add(key)
        keep.append(idx)
    return keep


def fit_pipeline(rows: list[dict[str, str]], schema: Schema) -> PreprocessPipeline:
    """Fit imputation, encoding, and standardization parameters.

    Exact duplicate rows (over the feature columns only) are removed first,
    keeping the first occurrence. Missing numerics take the column median,
    missing categoricals the mode (ties to the lexicographically smallest).
    Columns constant after imputation are dropped. Categories are coded by
    sorted order; numeric standardization uses the population std (ddof 0).
    """
    if not rows:
        raise TrainingError("cannot fit a pipeline on zero rows")
    deduped = [rows[i] for i in dedup_indices(rows, schema)]

    numeric_params: dict[str, dict[str, float]] = {}
    categorical_params: dict[str, dict] = {}
    retained: list[str] = []
    for col in schema.columns:
        raw = [row.get(col) for row in deduped]
        present = [v for v in raw if not is_missing(v)]
        if not present:
            raise TrainingError(f"column {col!r} has no observed values to impute from")
        if schema.kinds[col] == "numeric":
            numbers = [float(v) for v in present]
            median = _median(numbers)
            imputed = [float(v) if not is_missing(v) else median for v in raw]
            if min(imputed) == max(imputed):
                continue
            mean = sum(imputed) / len(imputed)
            std = math.sqrt(sum((x - mean) ** 2 for x in imputed) / len(imputed))
            numeric_params[col] = {"median": median, "mean": mean, "std": std}
        else:
            mode = _mode(present)
            imputed_cat = [v if not is_missing(v) else mode for v in raw]
            categories = sorted(set(imputed_cat))
            if len(categories) < 2:
                continue
            categorical_params[col] = {
                "mode": mode,
                "codes": {cat: code for code, cat in enumerate(categories)},
            }
        retained.append(col)
    return PreprocessPipeline(
        schema=schema,
        retained=tuple(retained),
        numeric_params=numeric_params,
        categorical_params=categorical_params,
    )


def transform(pipeline: PreprocessPipeline, row: dict[str, str]) -> np.ndarray:
    """Encode one record with stored parameters only; unseen category → -1."""
    if not pipeline.fitted:
        raise TrainingError("pipeline is not fitted")
    out: list[float] = []
    for col in pipeline.retained:
        if col not in row:
            raise TrainingError(f"record is missing schema feature {col!r}")
        value = row.get(col)
        if col in pipeline.numeric_params:
            params = pipeline.numeric_params[col]
            x = params["median"] if is_missing(value) else float(value)
            out.append((x - params["mean"]) / params["std"])
        else:
            params = pipeline.categorical_params[col]
            cat = params["mode"] if is_missing(value) else value
            out.append(float(params["codes"].get(cat, -1)))
    return np.array(out, dtype=np.float64)


def transform_all(pipeline: PreprocessPipeline, rows: list[dict[str, str]]) -> np.ndarray:
    if not rows:
        return np.zeros((0, len(pipeline.retained)), dtype=np.float64)
    return np.stack([transform(pipeline, row) for row in rows])


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    max_depth: int | None = None
    min_samples_split: int = 2
    features_per_split: int | None = None  # None -> floor(sqrt(d))
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise TrainingError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.max_depth is not None and self.max_depth < 1:
            raise TrainingError(f"max_depth must be >= 1 or None, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise TrainingError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise TrainingError(f"features_per_split must be >= 1 or None, got {self.features_per_split}")


@dataclass
class RandomForestModel:
    """Trained forest: JSON-serializable tree dicts plus metadata."""

    trees: list[dict]
    classes: tuple[str, ...]
    n_features: int
    params: ForestParams


@dataclass(frozen=True)
class DetectionResult:
    """Majority-vote label with the per-class tree votes behind it."""

    label: str
    votes: dict[str, int]


def _gini(counts: dict[str, int], total: int) -> float:
    return 1.0 - sum((c / total) ** 2 for c in counts.values())


def best_gini_split(
    x: np.ndarray,
    y: list[str],
    indices: list[int],
    feature_ids: list[int],
) -> tuple[int, float, float] | None:
    """Greedy split over the given features: (feature, threshold, score).

    Thresholds are midpoints strictly between consecutive distinct observed
    values. The score is the size-weighted mean child Gini impurity; ties
    break on the lower feature index, then the lower threshold. None when no
    feature has two distinct values.
    """
    n = len(indices)
    best: tuple[float, int, float] | None = None
    for f in sorted(feature_ids):
        values = sorted({float(x[i, f]) for i in indices})
        if len(values) < 2:
            continue
        ordered = sorted(indices, key=lambda i: float(x[i, f]))
        left_counts: dict[str, int] = {}
        right_counts: dict[str, int] = {}
        for i in ordered:
            right_counts[y[i]] = right_counts.get(y[i], 0) + 1
        cursor = 0
        for lo, hi in zip(values, values[1:]):
            threshold = (lo + hi) / 2.0
            if not lo < threshold < hi:
                continue
            while cursor < n and float(x[ordered[cursor], f]) <= threshold:
                label = y[ordered[cursor]]
                left_counts[label] = left_counts.get(label, 0) + 1
                right_counts[label] -= 1
                if right_counts[label] == 0:
                    del right_counts[label]
                cursor += 1
            n_left = cursor
            n_right = n - cursor
            score = (n_left / n) * _gini(left_counts, n_left) + (n_right / n) * _gini(right_counts, n_right)
            key = (score, f, threshold)
            if best is None or key < best:
                best = key
    if best is None:
        return None
    score, f, threshold = best
    return f, threshold, score


def _leaf(y: list[str], indices: list[int]) -> dict:
    counts: dict[str, int] = {}
    for i in indices:
        counts[y[i]] = counts.get(y[i], 0) + 1
    return {"leaf": True, "counts": counts}


def _build_tree(
    x: np.ndarray,
    y: list[str],
    indices: list[int],
    depth: int,
    params: ForestParams,
    k_features: int,
    rng: random.Random,
) -> dict:
    labels = {y[i] for i in indices}
    if (
        len(labels) == 1
        or len(indices) < params.min_samples_split
        or (params.max_depth is not None and depth >= params.max_depth)
    ):
        return _leaf(y, indices)
    feature_ids = rng.sample(range(x.shape[1]), k_features)
    split = best_gini_split(x, y, indices, feature_ids)
    if split is None:
        return _leaf(y, indices)
    f, threshold, _ = split
    left = [i for i in indices if float(x[i, f]) <= threshold]
    right = [i for i in indices if float(x[i, f]) > threshold]
    if not left or not right:
        return _leaf(y, indices)
    return {
        "leaf": False,
        "feature": f,
        "threshold": threshold,
        "left": _build_tree(x, y, left, depth + 1, params, k_features, rng),
        "right": _build_tree(x, y, right, depth + 1, params, k_features, rng),
    }


def train_forest(x: np.ndarray, y: list[str], params: ForestParams | None = None) -> RandomForestModel:
    """Train bootstrap-sampled Gini trees; deterministic for a fixed seed.

    Tree t draws its bootstrap sample and per-split feature subsets from
    random.Random(seed + t), so trees are independent and reproducible.
    """
    params = params or ForestParams()
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise TrainingError(f"feature matrix must be 2-D, got shape {x.shape}")
    n, d = x.shape
    if n != len(y):
        raise TrainingError(f"feature and label counts differ: {n} vs {len(y)}")
    if n < 2:
        raise TrainingError(f"need at least 2 samples to train, got {n}")
    classes = tuple(sorted(set(y)))
    if len(classes) < 2:
        raise TrainingError(f"need at least 2 classes to train, got {len(classes)}")
    k_features = params.features_per_split or max(1, int(math.isqrt(d)))
    if k_features > d:
        raise TrainingError(f"features_per_split {k_features} exceeds feature count {d}")

    trees: list[dict] = []
    for t in range(params.n_trees):
        rng = random.Random(params.seed + t)
        if params.bootstrap:
            indices = [rng.randrange(n) for _ in range(n)]
        else:
            indices = list(range(n))
        trees.append(_build_tree(x, y, indices, 0, params, k_features, rng))
    return RandomForestModel(trees=trees, classes=classes, n_features=d, params=params)


def _tree_vote(tree: dict, features: np.ndarray) -> str:
    node = tree
    while not node["leaf"]:
        node = node["left"] if float(features[node["feature"]]) <= node["threshold"] else node["right"]
    counts = node["counts"]
    best = max(counts.values())
    return min(label for label, c in counts.items() if c == best)


def predict(model: RandomForestModel, features: np.ndarray) -> DetectionResult:
    """Majority vote across trees; ties go to the smallest class label."""
    features = np.asarray(features, dtype=np.float64).ravel()
    if features.shape[0] != model.n_features:
        raise TrainingError(
            f"feature vector length {features.shape[0]} does not match training dimension {model.n_features}"
        )
    votes = {cls: 0 for cls in model.classes}
    for tree in model.trees:
        label = _tree_vote(tree, features)
        votes[label] = votes.get(label, 0) + 1
    best = max(votes.values())
    winner = min(label for label, c in votes.items() if c == best)
    return DetectionResult(label=winner, votes=votes)


def load_traffic_csv(path: str | Path, label_column: str = "label") -> tuple[list[dict[str, str]], list[str | None], list[str]]:
    """Read a traffic CSV: rows as dicts, labels, and feature column order."""
    path = Path(path)
    if not path.is_file():
        raise TrainingError(f"traffic CSV not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise TrainingError(f"{path}: empty file, expected a header row")
        feature_columns = [c for c in reader.fieldnames if c != label_column]
        rows: list[dict[str, str]] = []
        labels: list[str | None] = []
        for row in reader:
            rows.append({c: row.get(c) or "" for c in feature_columns})
            labels.append(row.get(label_column) if label_column in (reader.fieldnames or []) else None)
    if not rows:
        raise TrainingError(f"{path}: no data rows")
    return rows, labels, feature_columns


def save_detector(pipeline: PreprocessPipeline, model: RandomForestModel, path: str | Path) -> None:
    """Persist pipeline and forest together as one JSON document."""
    payload = {
        "format_version": FORMAT_VERSION,
        "pipeline": {
            "columns": list(pipeline.schema.columns),
            "kinds": dict(pipeline.schema.kinds),
            "retained": list(pipeline.retained),
            "numeric_params": pipeline.numeric_params,
            "categorical_params": pipeline.categorical_params,
        },
        "forest": {
            "trees": model.trees,
            "classes": list(model.classes),
            "n_features": model.n_features,
            "params": {
                "n_trees": model.params.n_trees,
                "max_depth": model.params.max_depth,
                "min_samples_split": model.params.min_samples_split,
                "features_per_split": model.params.features_per_split,
                "bootstrap": model.params.bootstrap,
                "seed": model.params.seed,
            },
        },
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_detector(path: str | Path) -> tuple[PreprocessPipeline, RandomForestModel]:
    path = Path(path)
    if not path.is_file():
        raise TrainingError(f"detector model file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TrainingError(f"{path}: invalid JSON: {exc}") from None
    if payload.get("format_version") != FORMAT_VERSION:
        raise TrainingError(f"{path}: unsupported format_version {payload.get('format_version')!r}")
    p = payload["pipeline"]
    pipeline = PreprocessPipeline(
        schema=Schema(columns=tuple(p["columns"]), kinds=dict(p["kinds"])),
        retained=tuple(p["retained"]),
        numeric_params={k: dict(v) for k, v in p["numeric_params"].items()},
        categorical_params={k: dict(v) for k, v in p["categorical_params"].items()},
    )
    f = payload["forest"]
    model = RandomForestModel(
        trees=f["trees"],
        classes=tuple(f["classes"]),
        n_features=int(f["n_features"]),
        params=ForestParams(**f["params"]),
    )
    return pipeline, model
