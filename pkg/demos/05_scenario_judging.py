"""
Scenario prompts and rubric judging, end to end
===============================================

Grounds an analyst prompt in the knowledge base, generates responses with
the deterministic offline model client, and quantifies the pre- versus
post-poisoning quality drop with the fixed 10-point rubric.
"""

import json
from pathlib import Path

from ragvenom import attacker, corpus, evaluation, knowledge_base, lexsem, prompts, surrogate

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

store = lexsem.load_vectors(FIXTURES / "vectors.txt")
records = corpus.load_corpus_csv(FIXTURES / "corpus.csv")
model = surrogate.fit(corpus.split_shuffled(records, ratio=0.8, seed=42).train)

source = json.loads((FIXTURES / "kb_source.json").read_text(encoding="utf-8"))
label_map = corpus.default_label_map()
descriptions = [
    corpus.DescriptionRecord(corpus.canonicalize_label(d["label"], label_map),
                             d["text"], origin="original")
    for d in source["descriptions"]
]
devices = dict(source["devices"])

# Two copies of the index: one clean, one poisoned by the attack.
clean_kb = knowledge_base.build_kb(descriptions, devices, store)
poisoned_kb = knowledge_base.build_kb(descriptions, devices, store)
originals = corpus.load_corpus_csv(FIXTURES / "originals.csv")
rewrites = attacker.attack_all(model, store, attacker.AttackConfig(), originals)
knowledge_base.poison(poisoned_kb, rewrites, model)

# The scenario prompt embeds the detected label, live traffic features,
# the retrieved description, and the device spec.
label = corpus.AttackClass("UDP Flood")
traffic = json.loads((FIXTURES / "traffic_snapshot.json").read_text(encoding="utf-8"))
requirements = (
    "Name the attack technique and its immediate impact on the device.",
    "List concrete mitigations in priority order.",
)


def scenario_for(kb: knowledge_base.KnowledgeBase) -> prompts.ScenarioContext:
    return prompts.ScenarioContext(
        attack_label=label,
        traffic_features=traffic,
        description_text=knowledge_base.retrieve_by_label(kb, label).text,
        device_spec_text=knowledge_base.retrieve_by_label(kb, "Raspberry Pi 4", "device_spec").text,
        response_requirements=requirements,
    )


# Mock mode synthesizes deterministic responses offline; point make_client
# at "http" (with LLM_ENDPOINT set) to drive a real model instead.
client = prompts.make_client("mock")
pre_prompt = prompts.render_scenario_prompt(scenario_for(clean_kb))
post_prompt = prompts.render_scenario_prompt(scenario_for(poisoned_kb))
print(f"prompts differ after poisoning: {pre_prompt != post_prompt}")
response_a = client.send(pre_prompt)
response_b = client.send(post_prompt)
print(f"\npre-attack response starts: {response_a.splitlines()[0]}")

# Judges always see the clean scenario, so response B is scored against
# ground truth it silently contradicts.
request = prompts.EvaluationRequest(
    scenario=scenario_for(clean_kb), response_a=response_a, response_b=response_b
)
eval_prompt = prompts.render_evaluation_prompt(request)
verdicts = [
    evaluation.parse_judge_response(client.send(eval_prompt), judge_id, "udp-flood")
    for judge_id in ("judge-one", "judge-two", "human:analyst")
]
for verdict in verdicts:
    print(f"  {verdict.judge_id:<14} pre {verdict.score_pre.total:>4} "
          f"post {verdict.score_post.total:>4}")

# Aggregation separates model judges from human judges and reports the
# pre/post delta per dataset and overall.
report = evaluation.aggregate(verdicts)
summary = report.overall
print(f"\njudge ensemble: pre {summary['judges_mean_pre']:.2f} "
      f"post {summary['judges_mean_post']:.2f} delta {summary['judges_delta']:.2f}")
print(evaluation.emit_report(report, format="markdown"))
