"""Command-line pipeline orchestration.

Subcommands mirror the attack pipeline end to end: generate the paraphrase
corpus, train and evaluate the surrogate, build the knowledge base, craft
adversarial rewrites, poison the KB, render scenario prompts pre/post
attack, collect judge verdicts, aggregate reports, and train/apply the
traffic detector. A JSON project config supplies defaults; command-line
flags win over it. Every run writes a manifest (config echo, seed, artifact
hashes) into the output directory; timestamps live only in manifests so
artifacts themselves stay byte-reproducible.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
"""

from __future__ import annotations

import argparse
import datetime
import hashlib
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import attacker, corpus, detector, evaluation, knowledge_base, lexsem, prompts, surrogate
from .errors import PipelineError, ToolkitError

DEFAULT_REQUIREMENTS = (
    "Identify the attack and explain the mechanism behind the observed traffic.",
    "Assess the likely impact on the affected device.",
    "Recommend concrete mitigations appropriate to the device.",
)


@dataclass
class ProjectConfig:
    """Resolved project settings: config file values with flag overrides."""

    data: dict = field(default_factory=dict)
    output_dir: Path = Path("out")
    seed: int = 42
    llm_mode: str = "mock"
    mock_dir: str | None = None

    @classmethod
    def load(cls, path: str | None) -> "ProjectConfig":
        data: dict = {}
        if path:
            file = Path(path)
            if not file.is_file():
                raise PipelineError(f"config file not found: {file}")
            try:
                data = json.loads(file.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise PipelineError(f"{file}: invalid JSON: {exc}") from None
            if not isinstance(data, dict):
                raise PipelineError(f"{file}: config must be a JSON object")
        cfg = cls(data=data)
        cfg.output_dir = Path(data.get("output_dir", "out"))
        cfg.seed = int(data.get("seed", 42))
        cfg.llm_mode = data.get("llm_mode", "mock")
        cfg.mock_dir = data.get("mock_dir")
        return cfg

    def get(self, section: str, key: str, default):
        return self.data.get(section, {}).get(key, default)


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(cfg: ProjectConfig, subcommand: str, args: argparse.Namespace, artifacts: list[Path]) -> None:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    echo = {k: str(v) if isinstance(v, Path) else v for k, v in vars(args).items() if k != "func"}
    manifest = {
        "subcommand": subcommand,
        "seed": cfg.seed,
        "llm_mode": cfg.llm_mode,
        "config": cfg.data,
        "args": echo,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "artifacts": {str(p): _sha256(p) for p in artifacts if p.is_file()},
    }
    path = cfg.output_dir / f"manifest_{subcommand.replace('-', '_')}.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _out_path(cfg: ProjectConfig, flag_value: str | None, default_name: str) -> Path:
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    return Path(flag_value) if flag_value else cfg.output_dir / default_name


def _label_map(args: argparse.Namespace) -> corpus.LabelMap:
    path = getattr(args, "label_map", None)
    if not path:
        return corpus.default_label_map()
    file = Path(path)
    if not file.is_file():
        raise PipelineError(f"label map not found: {file}")
    return corpus.label_map_from_json(json.loads(file.read_text(encoding="utf-8")))


def _attack_config(args: argparse.Namespace, cfg: ProjectConfig) -> attacker.AttackConfig:
    stopwords = lexsem.default_stopwords()
    stopwords_path = getattr(args, "stopwords", None) or cfg.get("attack", "stopwords", None)
    if stopwords_path:
        stopwords = lexsem.load_stopwords(stopwords_path)
    pick = lambda flag, key, default: flag if flag is not None else cfg.get("attack", key, default)
    return attacker.AttackConfig(
        sentence_sim_threshold=pick(getattr(args, "sentence_sim", None), "sentence_sim_threshold", 0.70),
        word_sim_threshold=pick(getattr(args, "word_sim", None), "word_sim_threshold", 0.50),
        max_candidates=pick(getattr(args, "max_candidates", None), "max_candidates", 50),
        max_perturb_fraction=pick(getattr(args, "max_perturb", None), "max_perturb_fraction", 0.40),
        stopwords=stopwords,
        seed=cfg.seed,
    )


def _load_store(args: argparse.Namespace, cfg: ProjectConfig) -> lexsem.WordVectorStore:
    path = getattr(args, "vectors", None) or cfg.get("paths", "vectors", None)
    if not path:
        raise PipelineError("no word-vector file given: pass --vectors or set paths.vectors in the config")
    return lexsem.load_vectors(path)


def _load_kb(args: argparse.Namespace, store: lexsem.WordVectorStore, cfg: ProjectConfig) -> knowledge_base.KnowledgeBase:
    path = getattr(args, "kb", None) or cfg.get("paths", "kb_file", None)
    if not path:
        raise PipelineError("no knowledge-base file given: pass --kb or set paths.kb_file in the config")
    return knowledge_base.load_kb(path, store)


def _banned_terms(cls: corpus.AttackClass) -> tuple[str, ...]:
    words = [w for w in cls.name.split() if len(w) >= 3]
    return tuple([cls.name] + [w for w in words if w != cls.name])


def _cmd_gen_corpus(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    label_map = _label_map(args)
    originals = corpus.load_corpus_csv(args.originals, label_map)
    client = prompts.make_client(cfg.llm_mode, cfg.mock_dir)
    variants: dict[corpus.AttackClass, list[str]] = {}
    for rec in originals:
        request = prompts.DatasetGenRequest(
            original_description=rec.text,
            count=args.count,
            banned_terms=_banned_terms(rec.cls),
        )
        output = client.send(prompts.render_dataset_generation_prompt(request))
        variants[rec.cls] = prompts.parse_variants(output, request)
    built = corpus.build_from_variants(originals, variants)
    out = _out_path(cfg, args.out, "corpus.csv")
    corpus.save_corpus_csv(built, out)
    print(f"wrote {len(built)} paraphrase records for {len(variants)} classes to {out}")
    _write_manifest(cfg, "gen-corpus", args, [out])
    return 0


def _cmd_train_surrogate(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    label_map = _label_map(args)
    records = corpus.load_corpus_csv(args.corpus, label_map)
    ratio = args.split_ratio if args.split_ratio is not None else cfg.get("surrogate", "split_ratio", 0.8)
    if args.no_split:
        train = records
    else:
        train = corpus.split_shuffled(records, ratio=ratio, seed=cfg.seed).train
    model = surrogate.fit(
        train,
        epochs=args.epochs if args.epochs is not None else cfg.get("surrogate", "epochs", 500),
        learning_rate=args.learning_rate
        if args.learning_rate is not None
        else cfg.get("surrogate", "learning_rate", 0.5),
        l2=args.l2 if args.l2 is not None else cfg.get("surrogate", "l2", 1e-4),
        seed=cfg.seed,
        ngrams=2 if args.bigrams else 1,
    )
    out = _out_path(cfg, args.out, "surrogate.json")
    surrogate.save_model(model, out)
    train_report = surrogate.classification_report(model, train)
    print(
        f"trained on {len(train)} records, {len(model.classes)} classes, "
        f"|vocab|={len(model.vocab)}; train accuracy {train_report['accuracy']:.4f}"
    )
    print(f"wrote model to {out}")
    _write_manifest(cfg, "train-surrogate", args, [out])
    return 0


def _print_report_table(report: dict) -> None:
    width = max(len(name) for name in report["per_class"]) + 2
    print(f"{'Class':<{width}}{'Precision':>10}{'Recall':>10}{'F1':>10}{'Support':>10}")
    for name, row in report["per_class"].items():
        print(
            f"{name:<{width}}{row['precision']:>10.4f}{row['recall']:>10.4f}"
            f"{row['f1']:>10.4f}{row['support']:>10d}"
        )
    print(f"{'Accuracy':<{width}}{'':>10}{'':>10}{report['accuracy']:>10.4f}{report['n_samples']:>10d}")
    for label, avg in (("Macro Average", report["macro"]), ("Weighted Average", report["weighted"])):
        print(
            f"{label:<{width}}{avg['precision']:>10.4f}{avg['recall']:>10.4f}"
            f"{avg['f1']:>10.4f}{report['n_samples']:>10d}"
        )


def _cmd_eval_surrogate(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    label_map = _label_map(args)
    records = corpus.load_corpus_csv(args.corpus, label_map)
    model = surrogate.load_model(args.model)
    ratio = args.split_ratio if args.split_ratio is not None else cfg.get("surrogate", "split_ratio", 0.8)
    split = corpus.split_shuffled(records, ratio=ratio, seed=cfg.seed)
    report = surrogate.classification_report(model, split.test)
    _print_report_table(report)
    out = _out_path(cfg, args.out, "surrogate_eval.json")
    out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    _write_manifest(cfg, "eval-surrogate", args, [out])
    return 0


def _cmd_build_kb(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    label_map = _label_map(args)
    store = _load_store(args, cfg)
    source_path = Path(args.source)
    if not source_path.is_file():
        raise PipelineError(f"KB source file not found: {source_path}")
    source = json.loads(source_path.read_text(encoding="utf-8"))
    descriptions = [
        corpus.DescriptionRecord(
            corpus.canonicalize_label(d["label"], label_map), d["text"], origin="original"
        )
        for d in source.get("descriptions", [])
    ]
    devices = dict(source.get("devices", {}))
    kb = knowledge_base.build_kb(descriptions, devices, store)
    out = _out_path(cfg, args.out, "kb.json")
    knowledge_base.save_kb(kb, out)
    print(f"built knowledge base: {len(kb.entries)} entries "
          f"({len(descriptions)} descriptions, {len(devices)} device specs) -> {out}")
    _write_manifest(cfg, "build-kb", args, [out])
    return 0


def _cmd_attack(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    label_map = _label_map(args)
    store = _load_store(args, cfg)
    model = surrogate.load_model(args.model)
    originals = corpus.load_corpus_csv(args.originals, label_map)
    attack_config = _attack_config(args, cfg)
    rewrites = attacker.attack_all(model, store, attack_config, originals)
    for rewrite in rewrites:
        problems = attacker.check_rewrite(rewrite, model, store, attack_config)
        if problems:
            raise PipelineError(f"unsound rewrite for {rewrite.cls.name!r}: {problems[0]}")
    out = _out_path(cfg, args.out, "rewrites.jsonl")
    attacker.save_rewrites(rewrites, attack_config, out)
    attacked = [r for r in rewrites if not r.skipped]
    successes = [r for r in attacked if r.success]
    for rewrite in rewrites:
        status = "skipped" if rewrite.skipped else ("ok" if rewrite.success else "failed")
        print(
            f"{rewrite.cls.name:<24} {status:<8} subs={len(rewrite.substitutions):<3} "
            f"sim={rewrite.sentence_sim:.4f} -> {rewrite.pred_after.name}"
        )
    rate = (len(successes) / len(attacked)) if attacked else 0.0
    print(f"success rate {len(successes)}/{len(attacked)} = {rate:.2%}; wrote {out}")
    _write_manifest(cfg, "attack", args, [out])
    return 0


def _cmd_poison(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    store = _load_store(args, cfg)
    kb = _load_kb(args, store, cfg)
    model = surrogate.load_model(args.model)
    rewrites, _ = attacker.load_rewrites(args.rewrites)
    report = knowledge_base.poison(kb, rewrites, model)
    out = Path(args.out) if args.out else Path(args.kb)
    knowledge_base.save_kb(kb, out)
    for item in report.applied:
        print(
            f"poisoned {item.label:<24} prediction={item.prediction:<24} "
            f"sim={item.sentence_sim:.4f} subs={item.substitution_count}"
        )
    for label, reason in report.untouched:
        print(f"untouched {label:<23} {reason}")
    print(f"poisoned {len(report.applied)} of {len(rewrites)} targets -> {out}")
    _write_manifest(cfg, "poison", args, [out])
    return 0


def _scenario_context(
    args: argparse.Namespace,
    cfg: ProjectConfig,
    kb: knowledge_base.KnowledgeBase,
    label: corpus.AttackClass,
) -> prompts.ScenarioContext:
    traffic: dict = {}
    traffic_path = getattr(args, "traffic", None) or cfg.get("paths", "traffic", None)
    if traffic_path:
        file = Path(traffic_path)
        if not file.is_file():
            raise PipelineError(f"traffic feature file not found: {file}")
        traffic = json.loads(file.read_text(encoding="utf-8"))
    description = knowledge_base.retrieve_by_label(kb, label, "attack_description")
    devices = sorted((e for e in kb.entries if e.kind == "device_spec"), key=lambda e: e.id)
    if not devices:
        raise PipelineError("knowledge base has no device_spec entries")
    if getattr(args, "device", None):
        device = knowledge_base.retrieve_by_label(kb, args.device, "device_spec")
    else:
        device = devices[0]
    requirements = tuple(cfg.get("prompts", "response_requirements", list(DEFAULT_REQUIREMENTS)))
    return prompts.ScenarioContext(
        attack_label=label,
        traffic_features=traffic,
        description_text=description.text,
        device_spec_text=device.text,
        response_requirements=requirements,
    )


def _cmd_scenario(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    label_map = _label_map(args)
    store = _load_store(args, cfg)
    kb = _load_kb(args, store, cfg)
    label = corpus.canonicalize_label(args.label, label_map)
    phase = "post" if args.post else "pre"
    if phase == "post" and label.name not in kb.poisoned_labels:
        raise PipelineError(
            f"--post requires a poisoned knowledge base, but {label.name!r} is not poisoned; "
            f"run the poison subcommand first"
        )
    if phase == "pre" and label.name in kb.poisoned_labels:
        raise PipelineError(
            f"--pre requires the clean knowledge base, but {label.name!r} is already poisoned; "
            f"point --kb at the pre-attack knowledge base"
        )
    context = _scenario_context(args, cfg, kb, label)
    prompt = prompts.render_scenario_prompt(context)
    slug = label.name.lower().replace(" ", "-")
    prompt_path = _out_path(cfg, args.prompt_out, f"scenario_{slug}_{phase}_prompt.txt")
    prompt_path.write_text(prompt, encoding="utf-8")
    artifacts = [prompt_path]
    print(f"wrote {phase}-attack scenario prompt to {prompt_path}")
    if not args.no_respond:
        client = prompts.make_client(cfg.llm_mode, cfg.mock_dir)
        response = client.send(prompt)
        response_path = _out_path(cfg, args.response_out, f"scenario_{slug}_{phase}_response.txt")
        response_path.write_text(response, encoding="utf-8")
        artifacts.append(response_path)
        print(f"wrote {phase}-attack response to {response_path}")
    _write_manifest(cfg, "scenario", args, artifacts)
    return 0


def _cmd_judge(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    label_map = _label_map(args)
    store = _load_store(args, cfg)
    kb = _load_kb(args, store, cfg)
    label = corpus.canonicalize_label(args.label, label_map)
    if label.name in kb.poisoned_labels:
        raise PipelineError(
            f"judging requires the original description, but {label.name!r} is poisoned in this "
            f"knowledge base; pass the pre-attack KB via --kb"
        )
    response_a = Path(args.response_a).read_text(encoding="utf-8")
    response_b = Path(args.response_b).read_text(encoding="utf-8")
    context = _scenario_context(args, cfg, kb, label)
    request = prompts.EvaluationRequest(scenario=context, response_a=response_a, response_b=response_b)
    prompt = prompts.render_evaluation_prompt(request)
    client = prompts.make_client(cfg.llm_mode, cfg.mock_dir)
    scenario_id = args.scenario_id or label.name.lower().replace(" ", "-")
    verdicts = []
    for judge_id in [j.strip() for j in args.judges.split(",") if j.strip()]:
        verdict = evaluation.parse_judge_response(client.send(prompt), judge_id, scenario_id)
        verdicts.append(verdict)
        print(
            f"{judge_id:<24} pre={verdict.score_pre.total:.2f} post={verdict.score_post.total:.2f}"
        )
    if not verdicts:
        raise PipelineError("no judge ids given; pass --judges as a comma-separated list")
    out = _out_path(cfg, args.out, "verdicts.csv")
    evaluation.save_verdicts_csv(verdicts, out)
    print(f"wrote {len(verdicts)} verdicts to {out}")
    _write_manifest(cfg, "judge", args, [out])
    return 0


def _cmd_report(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    verdicts = evaluation.load_verdicts_csv(args.verdicts)
    dataset_map = None
    if args.dataset_map:
        file = Path(args.dataset_map)
        if not file.is_file():
            raise PipelineError(f"dataset map not found: {file}")
        dataset_map = json.loads(file.read_text(encoding="utf-8"))
    report = evaluation.aggregate(verdicts, dataset_map)
    document = evaluation.emit_report(report, args.format)
    extension = {"json": "json", "csv": "csv", "markdown": "md"}[args.format]
    out = _out_path(cfg, args.out, f"report.{extension}")
    out.write_text(document, encoding="utf-8")
    for dataset in sorted(report.datasets):
        summary = report.datasets[dataset]
        if "judges_mean_pre" in summary:
            print(
                f"{dataset}: judges {summary['judges_mean_pre']:.2f} -> "
                f"{summary['judges_mean_post']:.2f} (delta {summary['judges_delta']:.2f})"
            )
        if "human_mean_pre" in summary:
            print(
                f"{dataset}: human  {summary['human_mean_pre']:.2f} -> "
                f"{summary['human_mean_post']:.2f} (delta {summary['human_delta']:.2f})"
            )
    print(f"wrote {args.format} report to {out}")
    _write_manifest(cfg, "report", args, [out])
    return 0


def _forest_params(args: argparse.Namespace, cfg: ProjectConfig) -> detector.ForestParams:
    pick = lambda flag, key, default: flag if flag is not None else cfg.get("detector", key, default)
    return detector.ForestParams(
        n_trees=pick(args.n_trees, "n_trees", 100),
        max_depth=pick(args.max_depth, "max_depth", None),
        min_samples_split=pick(args.min_samples_split, "min_samples_split", 2),
        features_per_split=pick(args.features_per_split, "features_per_split", None),
        bootstrap=not args.no_bootstrap,
        seed=cfg.seed,
    )


def _cmd_detect_train(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    rows, labels, columns = detector.load_traffic_csv(args.data, args.label_column)
    if any(label is None or label == "" for label in labels):
        raise PipelineError(f"training data must carry a {args.label_column!r} column with no blanks")
    schema = detector.infer_schema(rows, columns)
    keep = detector.dedup_indices(rows, schema)
    rows = [rows[i] for i in keep]
    y = [str(labels[i]) for i in keep]
    pipeline = detector.fit_pipeline(rows, schema)
    x = detector.transform_all(pipeline, rows)
    model = detector.train_forest(x, y, _forest_params(args, cfg))
    out = _out_path(cfg, args.out, "detector.json")
    detector.save_detector(pipeline, model, out)
    print(
        f"trained {model.params.n_trees} trees on {len(rows)} rows "
        f"({len(model.classes)} classes, {model.n_features} features) -> {out}"
    )
    _write_manifest(cfg, "detect-train", args, [out])
    return 0


def _cmd_detect_predict(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    pipeline, model = detector.load_detector(args.model)
    rows, labels, _ = detector.load_traffic_csv(args.data, args.label_column)
    results = [detector.predict(model, detector.transform(pipeline, row)) for row in rows]
    out = _out_path(cfg, args.label_out, "predictions.csv")
    with out.open("w", newline="", encoding="utf-8") as fh:
        fh.write("predicted_label\n")
        for result in results:
            fh.write(f"{result.label}\n")
    known = [(t, r.label) for t, r in zip(labels, results) if t]
    if known:
        correct = sum(1 for t, p in known if t == p)
        print(f"accuracy on labeled rows: {correct}/{len(known)} = {correct / len(known):.4f}")
    print(f"wrote {len(results)} predictions to {out}")
    _write_manifest(cfg, "detect-predict", args, [out])
    return 0


def _cmd_retrieve(args: argparse.Namespace, cfg: ProjectConfig) -> int:
    store = _load_store(args, cfg)
    kb = _load_kb(args, store, cfg)
    if args.query:
        results = knowledge_base.retrieve(kb, args.query, args.k, args.kind)
        for result in results:
            print(f"{result.score:.6f}  {result.entry.id:<32} {result.entry.label}")
    else:
        entry = knowledge_base.retrieve_by_label(kb, args.label, args.kind or "attack_description")
        print(f"{entry.id}  [{entry.kind}] {entry.label}")
        print(entry.text)
    _write_manifest(cfg, "retrieve", args, [])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ragvenom",
        description="Red-team toolkit: poison a RAG threat-analysis pipeline and measure the damage.",
    )
    parser.add_argument("--config", help="project config JSON; flags override its values")
    parser.add_argument("--seed", type=int, help="seed propagated to every seeded component")
    parser.add_argument("--output-dir", help="directory for artifacts and manifests")
    parser.add_argument("--mock", action="store_true", help="force the offline mock LLM client")
    sub = parser.add_subparsers(dest="subcommand", required=True, metavar="subcommand")

    p = sub.add_parser("gen-corpus", help="generate paraphrase variants per class via the LLM client")
    p.add_argument("--originals", required=True, help="CSV of original descriptions (text,label)")
    p.add_argument("--count", type=int, default=30, help="variants requested per class")
    p.add_argument("--label-map", help="label map JSON (raw -> canonical)")
    p.add_argument("--out", help="output corpus CSV")
    p.set_defaults(func=_cmd_gen_corpus)

    p = sub.add_parser("train-surrogate", help="fit the TF-IDF logistic-regression surrogate")
    p.add_argument("--corpus", required=True, help="paraphrase corpus CSV")
    p.add_argument("--label-map", help="label map JSON")
    p.add_argument("--epochs", type=int)
    p.add_argument("--learning-rate", type=float)
    p.add_argument("--l2", type=float)
    p.add_argument("--bigrams", action="store_true", help="add bigram features")
    p.add_argument("--split-ratio", type=float, help="train fraction (default 0.8)")
    p.add_argument("--no-split", action="store_true", help="train on the full corpus")
    p.add_argument("--out", help="output model JSON")
    p.set_defaults(func=_cmd_train_surrogate)

    p = sub.add_parser("eval-surrogate", help="held-out classification report for a trained model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--label-map", help="label map JSON")
    p.add_argument("--split-ratio", type=float)
    p.add_argument("--out", help="output report JSON")
    p.set_defaults(func=_cmd_eval_surrogate)

    p = sub.add_parser("build-kb", help="embed descriptions and device specs into a knowledge base")
    p.add_argument("--source", required=True, help="JSON with descriptions and devices")
    p.add_argument("--vectors", help="word-vector text file")
    p.add_argument("--label-map", help="label map JSON")
    p.add_argument("--out", help="output KB JSON")
    p.set_defaults(func=_cmd_build_kb)

    p = sub.add_parser("attack", help="craft adversarial rewrites of the original descriptions")
    p.add_argument("--model", required=True, help="surrogate model JSON")
    p.add_argument("--originals", required=True, help="CSV of originals to attack")
    p.add_argument("--vectors", help="word-vector text file")
    p.add_argument("--label-map", help="label map JSON")
    p.add_argument("--sentence-sim", type=float, help="sentence similarity threshold")
    p.add_argument("--word-sim", type=float, help="word similarity threshold")
    p.add_argument("--max-candidates", type=int, help="synonym candidates per position")
    p.add_argument("--max-perturb", type=float, help="max fraction of tokens substituted")
    p.add_argument("--stopwords", help="stopword file overriding the bundled list")
    p.add_argument("--out", help="output rewrites JSONL")
    p.set_defaults(func=_cmd_attack)

    p = sub.add_parser("poison", help="swap successful rewrites into the knowledge base")
    p.add_argument("--kb", required=True, help="knowledge base JSON to poison")
    p.add_argument("--rewrites", required=True, help="rewrites JSONL from the attack subcommand")
    p.add_argument("--model", required=True, help="surrogate model JSON")
    p.add_argument("--vectors", help="word-vector text file")
    p.add_argument("--out", help="output KB JSON (default: overwrite --kb)")
    p.set_defaults(func=_cmd_poison)

    p = sub.add_parser("scenario", help="render the analyst prompt and collect the LLM response")
    p.add_argument("--kb", required=True, help="knowledge base JSON")
    p.add_argument("--label", required=True, help="attack label to retrieve")
    p.add_argument("--vectors", help="word-vector text file")
    p.add_argument("--label-map", help="label map JSON")
    p.add_argument("--traffic", help="JSON file of traffic features")
    p.add_argument("--device", help="device label (default: first device entry)")
    phase = p.add_mutually_exclusive_group(required=True)
    phase.add_argument("--pre", action="store_true", help="pre-attack phase (clean KB required)")
    phase.add_argument("--post", action="store_true", help="post-attack phase (poisoned KB required)")
    p.add_argument("--no-respond", action="store_true", help="render the prompt only")
    p.add_argument("--prompt-out", help="output path for the rendered prompt")
    p.add_argument("--response-out", help="output path for the LLM response")
    p.set_defaults(func=_cmd_scenario)

    p = sub.add_parser("judge", help="score pre/post responses with judge LLMs")
    p.add_argument("--kb", required=True, help="pre-attack knowledge base JSON (original descriptions)")
    p.add_argument("--label", required=True)
    p.add_argument("--vectors", help="word-vector text file")
    p.add_argument("--label-map", help="label map JSON")
    p.add_argument("--traffic", help="JSON file of traffic features")
    p.add_argument("--device", help="device label")
    p.add_argument("--response-a", required=True, help="pre-attack response file")
    p.add_argument("--response-b", required=True, help="post-attack response file")
    p.add_argument("--judges", required=True, help="comma-separated judge ids")
    p.add_argument("--scenario-id", help="scenario id recorded in the verdict CSV")
    p.add_argument("--out", help="output verdict CSV")
    p.set_defaults(func=_cmd_judge)

    p = sub.add_parser("report", help="aggregate verdicts into pre/post comparison tables")
    p.add_argument("--verdicts", required=True, help="verdict CSV")
    p.add_argument("--dataset-map", help="JSON mapping scenario ids to dataset names")
    p.add_argument("--format", choices=("json", "csv", "markdown"), default="json")
    p.add_argument("--out", help="output report file")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("detect-train", help="train the traffic preprocessing pipeline and forest")
    p.add_argument("--data", required=True, help="training CSV with a label column")
    p.add_argument("--label-column", default="label")
    p.add_argument("--n-trees", type=int)
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-split", type=int)
    p.add_argument("--features-per-split", type=int)
    p.add_argument("--no-bootstrap", action="store_true")
    p.add_argument("--out", help="output detector JSON")
    p.set_defaults(func=_cmd_detect_train)

    p = sub.add_parser("detect-predict", help="label traffic rows with a trained detector")
    p.add_argument("--data", required=True, help="CSV of rows to label")
    p.add_argument("--model", required=True, help="detector JSON from detect-train")
    p.add_argument("--label-column", default="label")
    p.add_argument("--label-out", help="output predictions CSV")
    p.set_defaults(func=_cmd_detect_predict)

    p = sub.add_parser("retrieve", help="query the knowledge base by similarity or label")
    p.add_argument("--kb", required=True)
    p.add_argument("--vectors", help="word-vector text file")
    selector = p.add_mutually_exclusive_group(required=True)
    selector.add_argument("--query", help="free-text similarity query")
    selector.add_argument("--label", help="exact label lookup")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--kind", choices=knowledge_base.KINDS, help="restrict to one entry kind")
    p.set_defaults(func=_cmd_retrieve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = ProjectConfig.load(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.output_dir:
            cfg.output_dir = Path(args.output_dir)
        if args.mock:
            cfg.llm_mode = "mock"
        return args.func(args, cfg)
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
