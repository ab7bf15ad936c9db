"""
Training the traffic detector
=============================

Runs the tabular side of the toolkit: schema inference, deduplication,
imputation, encoding, standardization, and a small random forest over the
bundled flow-statistics CSV.
"""

from pathlib import Path

from ragvenom import detector

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

rows, labels, feature_columns = detector.load_traffic_csv(FIXTURES / "traffic.csv")
print(f"loaded {len(rows)} rows with features {feature_columns}")

# Columns where every present value parses as a float become numeric;
# everything else is categorical.
schema = detector.infer_schema(rows, feature_columns)
print(f"schema: {schema.kinds}")

# Exact duplicate feature rows collapse to their first occurrence.
keep = detector.dedup_indices(rows, schema)
print(f"deduplicated {len(rows)} -> {len(keep)} rows")

# The pipeline fits medians and modes for imputation, ordinal codes for
# categories, and per-column standardization with the population std.
pipeline = detector.fit_pipeline(rows, schema)
print(f"retained columns: {pipeline.retained}")
for col, params in pipeline.numeric_params.items():
    print(f"  {col:<10} median {params['median']:.2f} "
          f"mean {params['mean']:.2f} std {params['std']:.2f}")
for col, params in pipeline.categorical_params.items():
    print(f"  {col:<10} mode {params['mode']!r} codes {params['codes']}")

# Train on the first 70 deduplicated rows, hold out the rest.
deduped_rows = [rows[i] for i in keep]
deduped_labels = [labels[i] for i in keep]
x = detector.transform_all(pipeline, deduped_rows)
forest = detector.train_forest(x[:70], deduped_labels[:70],
                               detector.ForestParams(n_trees=50, seed=3))

correct = 0
for row_x, label in zip(x[70:], deduped_labels[70:]):
    if detector.predict(forest, row_x).label == label:
        correct += 1
held_out = len(deduped_labels) - 70
print(f"\nheld-out accuracy {correct}/{held_out} = {correct / held_out:.2f}")

# Per-row predictions come with the raw vote split.
result = detector.predict(forest, x[0])
print(f"first row: true={deduped_labels[0]} predicted={result.label} votes={result.votes}")
