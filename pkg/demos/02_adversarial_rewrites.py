"""
Crafting a meaning-preserving adversarial rewrite
=================================================

Walks the greedy word-substitution attack on one description: score word
importance by deletion, pull constraint-checked synonym candidates, then
swap words until the surrogate's prediction flips.
"""

from pathlib import Path

import numpy as np

from ragvenom import attacker, corpus, lexsem, surrogate

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

records = corpus.load_corpus_csv(FIXTURES / "corpus.csv")
split = corpus.split_shuffled(records, ratio=0.8, seed=42)
model = surrogate.fit(split.train)
store = lexsem.load_vectors(FIXTURES / "vectors.txt")
config = attacker.AttackConfig()

# Attack the canonical UDP Flood description.
originals = corpus.load_corpus_csv(FIXTURES / "originals.csv")
record = next(r for r in originals if r.cls.name == "UDP Flood")
tokens = [t for t, _, _ in surrogate.tokenize_with_spans(record.text)]
print(f"target: {record.cls.name}")
print(f"original ({len(tokens)} tokens): {record.text}\n")

# Deletion-based importance: how much does removing each word hurt the
# true-class probability? Stopwords score -inf and are never touched.
scores = attacker.word_importance(model, tokens, record.cls, config.stopwords)
ranked = np.argsort(-scores)[:3]
print("most important words:")
for i in ranked:
    print(f"  {tokens[i]:<14} importance {scores[i]:+.4f}")

# Candidates must clear word similarity >= 0.50, keep the POS tag in
# context, and not be stopwords.
position = int(ranked[0])
candidates = attacker.generate_candidates(config, store, tokens, position)
print(f"\nreplacement candidates for {tokens[position]!r}:")
for cand in candidates[:4]:
    print(f"  {cand.token:<14} word similarity {cand.word_sim:.4f}")

# The greedy loop swaps words in importance order, keeping the sentence
# embedding within 0.70 cosine of the original and at most 40% of tokens
# changed, and commits the first swap that flips the prediction.
rewrite = attacker.greedy_attack(model, store, config, record)
print(f"\nflipped: {rewrite.pred_before.name} -> {rewrite.pred_after.name}"
      f" (success={rewrite.success}, queries={rewrite.queries_used})")
print(f"sentence similarity {rewrite.sentence_sim:.4f}, "
      f"{len(rewrite.substitutions)} substitutions:")
for sub in rewrite.substitutions:
    print(f"  position {sub.position:>2}: {sub.original} -> {sub.replacement} "
          f"(word sim {sub.word_sim:.4f})")
print(f"\nrewrite: {rewrite.perturbed_text}")

# Re-verify every claim independently of the attack loop.
problems = attacker.check_rewrite(rewrite, model, store, config)
print(f"independent recheck: {'sound' if not problems else problems}")
