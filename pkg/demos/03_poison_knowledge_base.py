"""
Poisoning the retrieval index
=============================

Builds the vector-indexed knowledge base, attacks every canonical
description, swaps the successful rewrites into the index, and shows what
retrieval hands an analyst before and after.
"""

import json
from pathlib import Path

from ragvenom import attacker, corpus, knowledge_base, lexsem, surrogate

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

store = lexsem.load_vectors(FIXTURES / "vectors.txt")
records = corpus.load_corpus_csv(FIXTURES / "corpus.csv")
model = surrogate.fit(corpus.split_shuffled(records, ratio=0.8, seed=42).train)

# One embedded entry per canonical description plus one per device spec.
source = json.loads((FIXTURES / "kb_source.json").read_text(encoding="utf-8"))
label_map = corpus.default_label_map()
descriptions = [
    corpus.DescriptionRecord(corpus.canonicalize_label(d["label"], label_map),
                             d["text"], origin="original")
    for d in source["descriptions"]
]
kb = knowledge_base.build_kb(descriptions, dict(source["devices"]), store)
print(f"knowledge base: {len(kb.entries)} entries")

# A free-text query, the way the analysis pipeline grounds its prompts.
query = "endless datagrams saturate the bandwidth"
hits = knowledge_base.retrieve(kb, query, 3)
print(f"\ntop-3 for {query!r} (clean index):")
for hit in hits:
    print(f"  {hit.score:.4f} {hit.entry.id}")
before = knowledge_base.retrieve_by_label(kb, "UDP Flood").text

# Attack every original, then swap the successful rewrites into the index.
originals = corpus.load_corpus_csv(FIXTURES / "originals.csv")
rewrites = attacker.attack_all(model, store, attacker.AttackConfig(), originals)
report = knowledge_base.poison(kb, rewrites, model)
print(f"\npoisoned {len(report.applied)} of {len(rewrites)} descriptions")
for item in report.applied[:3]:
    print(f"  {item.label:<16} now classified {item.prediction:<16} "
          f"sim={item.sentence_sim:.4f} subs={item.substitution_count}")

# Same query, same scores to a reader, but the text behind the top hit has
# quietly changed, and the surrogate no longer recognizes it.
after = knowledge_base.retrieve_by_label(kb, "UDP Flood").text
print(f"\nUDP Flood description changed: {before != after}")
print(f"  before: {before[:72]}...")
print(f"  after:  {after[:72]}...")
print(f"surrogate now says: {model.predict([after])[0].name}")
