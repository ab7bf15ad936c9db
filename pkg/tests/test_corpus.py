from __future__ import annotations

import math

import pytest

from ragvenom.corpus import (
    CANONICAL_CLASSES,
    AttackClass,
    DescriptionRecord,
    build_from_variants,
    canonicalize_label,
    default_label_map,
    label_map_from_json,
    load_corpus_csv,
    save_corpus_csv,
    split_shuffled,
)
from ragvenom.errors import CorpusError


def test_canonical_classes_are_sorted_and_complete():
    assert len(CANONICAL_CLASSES) == 18
    assert list(CANONICAL_CLASSES) == sorted(CANONICAL_CLASSES)


def test_attack_class_rejects_empty_name():
    with pytest.raises(CorpusError):
        AttackClass("")
    with pytest.raises(CorpusError):
        AttackClass("   ")


def test_label_map_exact_and_folded_lookup():
    label_map = default_label_map()
    assert canonicalize_label("SQL Injection", label_map).name == "SQL Injection"
    assert canonicalize_label("  sql injection ", label_map).name == "SQL Injection"
    assert canonicalize_label("XSS", label_map).name == "Cross-Site Scripting"
    assert canonicalize_label("ddos udp flood", label_map).name == "UDP Flood"


def test_label_map_unknown_label_errors():
    label_map = default_label_map()
    with pytest.raises(CorpusError, match="Nonexistent Attack"):
        canonicalize_label("Nonexistent Attack", label_map)


def test_label_map_from_json_round_trip():
    label_map = label_map_from_json({"weird-raw": "Backdoor", "Backdoor": "Backdoor"})
    assert canonicalize_label("weird-raw", label_map).name == "Backdoor"
    with pytest.raises(CorpusError):
        canonicalize_label("SQL Injection", label_map)


def test_load_corpus_csv_reads_fixture(corpus_records):
    assert len(corpus_records) == 540
    labels = {r.cls.name for r in corpus_records}
    assert labels == set(CANONICAL_CLASSES)
    assert all(r.origin == "paraphrase" for r in corpus_records)


def test_load_corpus_csv_origin_column(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text(
        'text,label,origin\n"alpha text",Backdoor,original\n"beta text",Backdoor,adversarial\n',
        encoding="utf-8",
    )
    records = load_corpus_csv(path)
    assert [r.origin for r in records] == ["original", "adversarial"]


def test_load_corpus_csv_errors_carry_line_numbers(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("text,label\nok text,Backdoor\nbad text,No Such Class\n", encoding="utf-8")
    with pytest.raises(CorpusError, match="line 3"):
        load_corpus_csv(path)


def test_load_corpus_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "c.csv"
    path.write_text("description,label\nx,Backdoor\n", encoding="utf-8")
    with pytest.raises(CorpusError):
        load_corpus_csv(path)


def test_load_corpus_csv_missing_file(tmp_path):
    with pytest.raises(CorpusError, match="not found"):
        load_corpus_csv(tmp_path / "absent.csv")


def test_corpus_csv_round_trip_preserves_text_bytes(tmp_path):
    tricky = 'He said, "drop table users; -- now", then left.\tTabbed.'
    records = [DescriptionRecord(AttackClass("SQL Injection"), tricky, origin="paraphrase")]
    path = tmp_path / "round.csv"
    save_corpus_csv(records, path)
    back = load_corpus_csv(path)
    assert back[0].text == tricky
    assert back[0].cls == records[0].cls


def test_build_from_variants_dedups_and_excludes_originals():
    cls_a = AttackClass("Backdoor")
    cls_b = AttackClass("MITM")
    originals = [
        DescriptionRecord(cls_a, "original a", origin="original"),
        DescriptionRecord(cls_b, "original b", origin="original"),
    ]
    built = build_from_variants(
        originals,
        {cls_a: ["v1", "v2", "v1"], "MITM": ["w1"]},
    )
    texts = [r.text for r in built]
    assert texts == ["v1", "v2", "w1"]
    assert all(r.origin == "paraphrase" for r in built)
    assert "original a" not in texts


def test_build_from_variants_unknown_class_errors():
    originals = [DescriptionRecord(AttackClass("Backdoor"), "x", origin="original")]
    with pytest.raises(CorpusError, match="Uploading"):
        build_from_variants(originals, {"Uploading": ["v"]})


def test_build_from_variants_empty_list_skips_class(caplog):
    originals = [
        DescriptionRecord(AttackClass("Backdoor"), "x", origin="original"),
        DescriptionRecord(AttackClass("MITM"), "y", origin="original"),
    ]
    with caplog.at_level("WARNING"):
        built = build_from_variants(originals, {"Backdoor": ["v"], "MITM": []})
    assert [r.cls.name for r in built] == ["Backdoor"]
    assert any("MITM" in message for message in caplog.messages)


def test_split_shuffled_is_stratified_and_deterministic(corpus_records):
    first = split_shuffled(corpus_records, ratio=0.8, seed=42)
    second = split_shuffled(corpus_records, ratio=0.8, seed=42)
    assert [r.text for r in first.train] == [r.text for r in second.train]
    assert [r.text for r in first.test] == [r.text for r in second.test]
    per_class_train = {}
    per_class_test = {}
    for r in first.train:
        per_class_train[r.cls.name] = per_class_train.get(r.cls.name, 0) + 1
    for r in first.test:
        per_class_test[r.cls.name] = per_class_test.get(r.cls.name, 0) + 1
    # ceil(0.8 * 30) = 24 train, 6 test for every class
    assert set(per_class_train.values()) == {math.ceil(0.8 * 30)}
    assert set(per_class_test.values()) == {30 - math.ceil(0.8 * 30)}
    train_texts = {r.text for r in first.train}
    test_texts = {r.text for r in first.test}
    assert not train_texts & test_texts
    assert len(first.train) + len(first.test) == len(corpus_records)


def test_split_shuffled_seed_changes_membership(corpus_records):
    a = split_shuffled(corpus_records, ratio=0.8, seed=42)
    b = split_shuffled(corpus_records, ratio=0.8, seed=43)
    assert {r.text for r in a.test} != {r.text for r in b.test}


def test_split_shuffled_rejects_degenerate_inputs():
    cls = AttackClass("Backdoor")
    records = [DescriptionRecord(cls, "only one", origin="paraphrase")]
    with pytest.raises(CorpusError):
        split_shuffled(records, ratio=0.8, seed=0)
    two = [
        DescriptionRecord(cls, "first text", origin="paraphrase"),
        DescriptionRecord(cls, "second text", origin="paraphrase"),
    ]
    with pytest.raises(CorpusError):
        split_shuffled(two, ratio=1.0, seed=0)  # empty test side
    with pytest.raises(CorpusError):
        split_shuffled(two, ratio=0.0, seed=0)
    with pytest.raises(CorpusError):
        split_shuffled(two, ratio=1.5, seed=0)
    with pytest.raises(CorpusError):
        split_shuffled([], ratio=0.8, seed=0)
