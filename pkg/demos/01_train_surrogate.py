"""
Training the surrogate attack-description classifier
=====================================================

Fits the TF-IDF + multinomial logistic regression surrogate on the bundled
paraphrase corpus and inspects what the linear head keys on.
"""

from pathlib import Path

import numpy as np

from ragvenom import corpus, surrogate

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"

# The corpus holds paraphrases of one canonical description per attack class.
records = corpus.load_corpus_csv(FIXTURES / "corpus.csv")
classes = sorted({r.cls.name for r in records})
print(f"loaded {len(records)} paraphrases across {len(classes)} classes")

# Stratified shuffle keeps every class present on both sides of the split.
split = corpus.split_shuffled(records, ratio=0.8, seed=42)
print(f"train {len(split.train)} / test {len(split.test)}")

# Full-batch gradient descent from zero init: equal inputs, equal weights.
model = surrogate.fit(split.train)
report = surrogate.classification_report(model, split.test)
print(f"held-out accuracy {report['accuracy']:.4f}, macro F1 {report['macro']['f1']:.4f}")

# The heaviest positive weights per class are the words the surrogate
# treats as that class's signature; these are the attack's prime targets.
print("\nmost indicative terms per class (first 5 classes):")
for k, cls in enumerate(model.classes[:5]):
    top = np.argsort(model.weights[k])[-4:][::-1]
    terms = ", ".join(model.vocab.tokens[i] for i in top)
    print(f"  {cls.name:<24} {terms}")

# The trained surrogate stands in for the real pipeline's classifier: the
# attack only ever queries these probabilities.
sample = "a torrent of datagrams floods the uplink and saturates bandwidth"
probs = model.predict_proba([sample])[0]
best = int(np.argmax(probs))
print(f"\nsample text -> {model.classes[best].name} (p={probs[best]:.3f})")
