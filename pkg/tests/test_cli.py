from __future__ import annotations

import hashlib
import json

import pytest

from ragvenom import attacker, corpus, detector, evaluation, knowledge_base, lexsem, surrogate
from ragvenom.cli import main


@pytest.fixture(scope="module")
def cli_run(tmp_path_factory, fixtures_dir):
    """One full mock-mode pipeline over the bundled fixtures."""
    out = tmp_path_factory.mktemp("cli_out")
    fx = fixtures_dir
    vectors = str(fx / "vectors.txt")

    def run(*argv: str) -> None:
        assert main(["--output-dir", str(out), *argv]) == 0

    run("train-surrogate", "--corpus", str(fx / "corpus.csv"), "--out", str(out / "surrogate.json"))
    run("build-kb", "--source", str(fx / "kb_source.json"), "--vectors", vectors,
        "--out", str(out / "kb.json"))
    run("attack", "--model", str(out / "surrogate.json"), "--originals", str(fx / "originals.csv"),
        "--vectors", vectors, "--out", str(out / "rewrites.jsonl"))
    run("poison", "--kb", str(out / "kb.json"), "--rewrites", str(out / "rewrites.jsonl"),
        "--model", str(out / "surrogate.json"), "--vectors", vectors,
        "--out", str(out / "kb_poisoned.json"))
    run("scenario", "--kb", str(out / "kb.json"), "--label", "UDP Flood", "--vectors", vectors,
        "--traffic", str(fx / "traffic_snapshot.json"), "--pre",
        "--prompt-out", str(out / "pre_prompt.txt"), "--response-out", str(out / "pre_response.txt"))
    run("scenario", "--kb", str(out / "kb_poisoned.json"), "--label", "UDP Flood", "--vectors", vectors,
        "--traffic", str(fx / "traffic_snapshot.json"), "--post",
        "--prompt-out", str(out / "post_prompt.txt"), "--response-out", str(out / "post_response.txt"))
    run("judge", "--kb", str(out / "kb.json"), "--label", "UDP Flood", "--vectors", vectors,
        "--traffic", str(fx / "traffic_snapshot.json"),
        "--response-a", str(out / "pre_response.txt"), "--response-b", str(out / "post_response.txt"),
        "--judges", "judge-one,judge-two", "--out", str(out / "verdicts.csv"))
    run("report", "--verdicts", str(out / "verdicts.csv"), "--format", "json",
        "--out", str(out / "report.json"))
    run("detect-train", "--data", str(fx / "traffic.csv"), "--n-trees", "40",
        "--out", str(out / "detector.json"))
    run("detect-predict", "--data", str(fx / "traffic.csv"), "--model", str(out / "detector.json"),
        "--label-out", str(out / "predictions.csv"))
    return out


def test_trained_surrogate_artifact(cli_run):
    model = surrogate.load_model(cli_run / "surrogate.json")
    assert len(model.classes) == 18


def test_built_kb_artifact(cli_run, store):
    kb = knowledge_base.load_kb(cli_run / "kb.json", store)
    assert len(kb.entries) == 20
    assert kb.poisoned_labels == []


def test_attack_artifact_all_rewrites_succeed(cli_run):
    rewrites, config = attacker.load_rewrites(cli_run / "rewrites.jsonl")
    assert len(rewrites) == 18
    assert all(r.success for r in rewrites)
    assert config.sentence_sim_threshold == 0.70


def test_poisoned_kb_artifact(cli_run, store):
    clean = knowledge_base.load_kb(cli_run / "kb.json", store)
    poisoned = knowledge_base.load_kb(cli_run / "kb_poisoned.json", store)
    assert poisoned.poisoned_labels == sorted(c.name for c in corpus.default_label_map().canonical_classes)
    changed = [
        e.label for e in poisoned.entries
        if knowledge_base.retrieve_by_label(clean, e.label, e.kind).text != e.text
    ]
    assert len(changed) == 18  # every description swapped, device specs untouched


def test_scenario_prompts_swap_descriptions(cli_run):
    pre = (cli_run / "pre_prompt.txt").read_text(encoding="utf-8")
    post = (cli_run / "post_prompt.txt").read_text(encoding="utf-8")
    assert "Detected attack label: UDP Flood" in pre
    assert "Detected attack label: UDP Flood" in post
    assert pre != post
    assert "Response requirements:" in pre
    assert '"fwd_packets_per_s": 9421.7' in pre


def test_judge_artifact(cli_run):
    verdicts = evaluation.load_verdicts_csv(cli_run / "verdicts.csv")
    assert [v.judge_id for v in verdicts] == ["judge-one", "judge-two"]
    assert all(v.scenario_id == "udp-flood" for v in verdicts)


def test_report_artifact(cli_run):
    report = json.loads((cli_run / "report.json").read_text(encoding="utf-8"))
    assert report["overall"]["n_judges"] == 2
    assert "judges_mean_pre" in report["overall"]


def test_detector_artifacts(cli_run):
    pipeline, model = detector.load_detector(cli_run / "detector.json")
    assert model.params.n_trees == 40
    lines = (cli_run / "predictions.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "predicted_label"
    assert len(lines) == 93  # header + one prediction per traffic row
    assert set(lines[1:]) <= {"benign", "flood"}


def test_manifest_records_artifact_hashes(cli_run):
    manifest = json.loads((cli_run / "manifest_attack.json").read_text(encoding="utf-8"))
    assert manifest["subcommand"] == "attack"
    assert manifest["seed"] == 42
    digest = hashlib.sha256((cli_run / "rewrites.jsonl").read_bytes()).hexdigest()
    assert manifest["artifacts"][str(cli_run / "rewrites.jsonl")] == digest


def test_gen_corpus_round_trip(tmp_path, fixtures_dir):
    out = tmp_path / "gen_corpus.csv"
    code = main([
        "--output-dir", str(tmp_path), "gen-corpus",
        "--originals", str(fixtures_dir / "originals.csv"), "--count", "5", "--out", str(out),
    ])
    assert code == 0
    built = corpus.load_corpus_csv(out)
    assert len(built) == 18 * 5
    assert all(rec.origin == "paraphrase" for rec in built)


def test_scenario_post_requires_poisoned_kb(cli_run, tmp_path, fixtures_dir, capsys):
    code = main([
        "--output-dir", str(tmp_path), "scenario", "--kb", str(cli_run / "kb.json"),
        "--label", "UDP Flood", "--vectors", str(fixtures_dir / "vectors.txt"), "--post",
    ])
    assert code == 1
    assert "run the poison subcommand first" in capsys.readouterr().err


def test_scenario_pre_rejects_poisoned_kb(cli_run, tmp_path, fixtures_dir, capsys):
    code = main([
        "--output-dir", str(tmp_path), "scenario", "--kb", str(cli_run / "kb_poisoned.json"),
        "--label", "UDP Flood", "--vectors", str(fixtures_dir / "vectors.txt"), "--pre",
    ])
    assert code == 1
    assert "already poisoned" in capsys.readouterr().err


def test_judge_rejects_poisoned_kb(cli_run, tmp_path, fixtures_dir, capsys):
    code = main([
        "--output-dir", str(tmp_path), "judge", "--kb", str(cli_run / "kb_poisoned.json"),
        "--label", "UDP Flood", "--vectors", str(fixtures_dir / "vectors.txt"),
        "--response-a", str(cli_run / "pre_response.txt"),
        "--response-b", str(cli_run / "post_response.txt"), "--judges", "j1",
    ])
    assert code == 1
    assert "pre-attack KB" in capsys.readouterr().err


def test_scenario_no_respond_writes_prompt_only(cli_run, tmp_path, fixtures_dir):
    code = main([
        "--output-dir", str(tmp_path), "scenario", "--kb", str(cli_run / "kb.json"),
        "--label", "MITM", "--vectors", str(fixtures_dir / "vectors.txt"), "--pre", "--no-respond",
    ])
    assert code == 0
    assert (tmp_path / "scenario_mitm_pre_prompt.txt").is_file()
    assert not (tmp_path / "scenario_mitm_pre_response.txt").exists()


def test_retrieve_by_query_prints_ranked_rows(cli_run, tmp_path, fixtures_dir, capsys):
    code = main([
        "--output-dir", str(tmp_path), "retrieve", "--kb", str(cli_run / "kb.json"),
        "--vectors", str(fixtures_dir / "vectors.txt"),
        "--query", "datagrams barrage bandwidth", "--k", "3",
    ])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 3
    assert "UDP Flood" in lines[0]
    scores = [float(line.split()[0]) for line in lines]
    assert scores == sorted(scores, reverse=True)


def test_retrieve_by_label_prints_entry(cli_run, tmp_path, fixtures_dir, capsys):
    code = main([
        "--output-dir", str(tmp_path), "retrieve", "--kb", str(cli_run / "kb.json"),
        "--vectors", str(fixtures_dir / "vectors.txt"),
        "--label", "Raspberry Pi 4", "--kind", "device_spec",
    ])
    assert code == 0
    output = capsys.readouterr().out
    assert "device:raspberry-pi-4" in output
    assert "[device_spec] Raspberry Pi 4" in output


def test_report_prints_dataset_summaries(tmp_path, fixtures_dir, capsys):
    code = main([
        "--output-dir", str(tmp_path), "report",
        "--verdicts", str(fixtures_dir / "verdicts_reference.csv"),
        "--dataset-map", str(fixtures_dir / "dataset_map.json"), "--format", "markdown",
    ])
    assert code == 0
    output = capsys.readouterr().out
    assert "edge-iiotset: judges 9.85 -> 9.23 (delta 0.62)" in output
    assert "edge-iiotset: human  9.73 -> 8.69 (delta 1.04)" in output
    assert "cic-iot-2023: judges 9.69 -> 8.62 (delta 1.07)" in output
    assert "cic-iot-2023: human  9.67 -> 8.43 (delta 1.24)" in output
    assert (tmp_path / "report.md").is_file()


def test_detect_train_rejects_blank_labels(tmp_path, capsys):
    data = tmp_path / "bad.csv"
    data.write_text("a,b,label\n1,2,benign\n3,4,\n", encoding="utf-8")
    code = main(["--output-dir", str(tmp_path), "detect-train", "--data", str(data)])
    assert code == 1
    assert "no blanks" in capsys.readouterr().err


def test_usage_errors_exit_two():
    with pytest.raises(SystemExit) as exc:
        main(["scenario"])  # missing required flags
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-subcommand"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_missing_config_file_is_a_domain_error(tmp_path, capsys):
    code = main(["--config", str(tmp_path / "absent.json"), "retrieve", "--kb", "x", "--query", "y"])
    assert code == 1
    assert "config file not found" in capsys.readouterr().err


def test_invalid_config_json_is_a_domain_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("[1, 2]", encoding="utf-8")
    code = main(["--config", str(bad), "retrieve", "--kb", "x", "--query", "y"])
    assert code == 1
    assert "JSON object" in capsys.readouterr().err


def test_config_supplies_paths_and_flags_override(cli_run, tmp_path, fixtures_dir):
    config_out = tmp_path / "from_config"
    config = {
        "output_dir": str(config_out),
        "paths": {"vectors": str(fixtures_dir / "vectors.txt"), "kb_file": str(cli_run / "kb.json")},
    }
    config_path = tmp_path / "project.json"
    config_path.write_text(json.dumps(config), encoding="utf-8")

    code = main(["--config", str(config_path), "retrieve", "--query", "datagrams", "--kb", str(cli_run / "kb.json")])
    assert code == 0
    assert (config_out / "manifest_retrieve.json").is_file()

    flag_out = tmp_path / "from_flag"
    code = main([
        "--config", str(config_path), "--output-dir", str(flag_out),
        "retrieve", "--query", "datagrams", "--kb", str(cli_run / "kb.json"),
    ])
    assert code == 0
    assert (flag_out / "manifest_retrieve.json").is_file()


def test_mock_flag_overrides_http_mode(cli_run, tmp_path, fixtures_dir, monkeypatch, capsys):
    monkeypatch.delenv("LLM_ENDPOINT", raising=False)
    config_path = tmp_path / "http.json"
    config_path.write_text(json.dumps({"llm_mode": "http"}), encoding="utf-8")
    subcommand = [
        "scenario", "--kb", str(cli_run / "kb.json"), "--label", "MITM",
        "--vectors", str(fixtures_dir / "vectors.txt"), "--pre",
    ]
    globals_ = ["--config", str(config_path), "--output-dir", str(tmp_path)]
    assert main(globals_ + subcommand) == 1  # http mode with no endpoint configured
    assert "LLM_ENDPOINT" in capsys.readouterr().err
    assert main(globals_ + ["--mock"] + subcommand) == 0
