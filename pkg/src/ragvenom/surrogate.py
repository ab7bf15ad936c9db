"""Surrogate text classifier: TF-IDF features + multinomial logistic regression.

This is the attacker-side stand-in for the victim's (unavailable) classifier.
It is deliberately small and fully deterministic: a fixed tokenizer, a
vocabulary frozen at fit time, smoothed IDF weights, L2-normalized rows, and
full-batch gradient descent from zero-initialized parameters. The gradient is
exposed separately from the update loop so it can be checked against finite
differences.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import AttackClass, Corpus
from .errors import TrainingError

FORMAT_VERSION = 1
MODEL_KIND = "surrogate-tfidf-logreg"

#: Word tokens: letter/digit runs, allowing internal apostrophes and hyphens.
_TOKEN_RE = re.compile(r"[^\W_]+(?:['\-][^\W_]+)*", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Split text into lowercased word tokens."""
    return [m.group(0).lower() for m in _TOKEN_RE.finditer(text)]


def tokenize_with_spans(text: str) -> list[tuple[str, int, int]]:
    """Tokenize keeping each token's original character span.

    Returns ``(token, start, end)`` triples; the token is lowercased but the
    span indexes into the untouched input, so replacements can be spliced
    back without disturbing surrounding punctuation.
    """
    return [(m.group(0).lower(), m.start(), m.end()) for m in _TOKEN_RE.finditer(text)]


def _terms(text: str, ngrams: int) -> list[str]:
    """Feature terms for a text: unigrams, plus joined bigrams if enabled."""
    tokens = tokenize(text)
    if ngrams < 2:
        return tokens
    return tokens + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]


@dataclass(frozen=True)
class Vocabulary:
    """Frozen term vocabulary with per-term document frequencies.

    Term index equals its position in ``tokens``; indices are dense 0..V-1.
    """

    tokens: tuple[str, ...]
    df: tuple[int, ...]
    n_docs: int
    ngrams: int = 1

    def __post_init__(self) -> None:
        if len(self.tokens) != len(self.df):
            raise TrainingError("vocabulary tokens and df lengths differ")
        if any(d < 1 for d in self.df):
            raise TrainingError("document frequencies must be >= 1")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def index(self, token: str) -> int | None:
        return self._index.get(token)  # type: ignore[attr-defined]


def build_vocabulary(texts: list[str], ngrams: int = 1) -> Vocabulary:
    """Collect sorted training terms and their document frequencies."""
    if not texts:
        raise TrainingError("cannot build a vocabulary from zero documents")
    df: dict[str, int] = {}
    for text in texts:
        for term in set(_terms(text, ngrams)):
            df[term] = df.get(term, 0) + 1
    if not df:
        raise TrainingError("no tokens found in any training document")
    terms = tuple(sorted(df))
    return Vocabulary(tokens=terms, df=tuple(df[t] for t in terms), n_docs=len(texts), ngrams=ngrams)


def idf_weights(vocab: Vocabulary) -> np.ndarray:
    """Smoothed inverse document frequency: ln((1+N)/(1+df)) + 1."""
    df = np.asarray(vocab.df, dtype=np.float64)
    return np.log((1.0 + vocab.n_docs) / (1.0 + df)) + 1.0


def featurize(texts: list[str], vocab: Vocabulary, idf: np.ndarray) -> np.ndarray:
    """Map texts to L2-normalized TF-IDF rows (raw-count TF).

    Terms outside the vocabulary are ignored; an all-out-of-vocabulary text
    keeps its all-zero row.
    """
    x = np.zeros((len(texts), len(vocab)), dtype=np.float64)
    for row, text in enumerate(texts):
        for term in _terms(text, vocab.ngrams):
            idx = vocab.index(term)
            if idx is not None:
                x[row, idx] += 1.0
    x *= idf
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    np.divide(x, norms, out=x, where=norms > 0.0)
    return x


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def loss_and_grad(
    weights: np.ndarray,
    bias: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    l2: float,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Cross-entropy loss with L2 penalty, and its analytic gradients.

    J = -(1/n) sum_i log p(y_i | x_i) + (l2/2) ||W||^2. The bias is not
    penalized. ``y`` holds integer class indices. Returned gradients have the
    shapes of ``weights`` (K, V) and ``bias`` (K,).
    """
    n = x.shape[0]
    if n == 0:
        raise TrainingError("loss requires at least one sample")
    probs = softmax(x @ weights.T + bias)
    eps = np.finfo(np.float64).tiny
    loss = -np.log(probs[np.arange(n), y] + eps).mean() + 0.5 * l2 * float(np.sum(weights * weights))
    delta = probs.copy()
    delta[np.arange(n), y] -= 1.0
    grad_w = delta.T @ x / n + l2 * weights
    grad_b = delta.mean(axis=0)
    return float(loss), grad_w, grad_b


@dataclass
class SurrogateClassifier:
    """Multinomial logistic regression over TF-IDF features.

    ``classes`` is sorted lexicographically at fit time and fixes the column
    order of every probability matrix this model ever returns. Weights start
    at zero, so a 0-epoch fit predicts uniform probabilities. ``seed`` is
    provenance only: the full-batch optimizer draws no random numbers.
    """

    vocab: Vocabulary
    idf: np.ndarray  # (V,)
    classes: tuple[AttackClass, ...]
    weights: np.ndarray  # (K, V)
    bias: np.ndarray  # (K,)
    epochs: int = 0
    learning_rate: float = 0.0
    l2: float = 0.0
    seed: int = 0
    losses: list[float] = field(default_factory=list, repr=False)

    def class_index(self, cls: AttackClass) -> int:
        try:
            return self.classes.index(cls)
        except ValueError:
            raise TrainingError(f"class {cls.name!r} not known to this model") from None

    def predict_proba(self, texts: list[str]) -> np.ndarray:
        """Class probabilities, one row per text, columns in class order."""
        x = featurize(texts, self.vocab, self.idf)
        return softmax(x @ self.weights.T + self.bias)

    def predict(self, texts: list[str]) -> list[AttackClass]:
        """Most probable class per text; ties break to the first maximum."""
        probs = self.predict_proba(texts)
        return [self.classes[i] for i in np.argmax(probs, axis=1)]


def predict_proba(model: SurrogateClassifier, text: str) -> np.ndarray:
    """Probability vector for one text, aligned to model.classes."""
    return model.predict_proba([text])[0]


def fit(
    corpus: Corpus,
    epochs: int = 500,
    learning_rate: float = 0.5,
    l2: float = 1e-4,
    seed: int = 0,
    ngrams: int = 1,
) -> SurrogateClassifier:
    """Train the surrogate by full-batch gradient descent.

    Deterministic: no shuffling, zero initialization, fixed class order, so
    equal inputs give bit-identical weights regardless of seed (which is
    recorded for provenance). Training loss is tracked per epoch; a
    non-finite loss aborts with the offending learning rate.
    """
    if not corpus:
        raise TrainingError("cannot fit on an empty corpus")
    if epochs < 0:
        raise TrainingError(f"epochs must be >= 0, got {epochs}")
    if learning_rate <= 0.0 and epochs > 0:
        raise TrainingError(f"learning rate must be positive, got {learning_rate}")
    if l2 < 0.0:
        raise TrainingError(f"l2 penalty must be >= 0, got {l2}")
    if ngrams not in (1, 2):
        raise TrainingError(f"ngrams must be 1 or 2, got {ngrams}")

    texts = [r.text for r in corpus]
    classes = tuple(sorted({r.cls for r in corpus}, key=lambda c: c.name))
    if len(classes) < 2:
        raise TrainingError(f"need at least 2 classes to fit, got {len(classes)}")
    class_idx = {c: i for i, c in enumerate(classes)}
    y = np.array([class_idx[r.cls] for r in corpus], dtype=np.intp)

    vocab = build_vocabulary(texts, ngrams=ngrams)
    idf = idf_weights(vocab)
    x = featurize(texts, vocab, idf)
    weights = np.zeros((len(classes), len(vocab)), dtype=np.float64)
    bias = np.zeros(len(classes), dtype=np.float64)

    losses: list[float] = []
    for epoch in range(epochs):
        loss, grad_w, grad_b = loss_and_grad(weights, bias, x, y, l2)
        if not np.isfinite(loss):
            raise TrainingError(
                f"training diverged at epoch {epoch} (learning rate {learning_rate}): loss={loss}"
            )
        losses.append(loss)
        weights -= learning_rate * grad_w
        bias -= learning_rate * grad_b

    return SurrogateClassifier(
        vocab=vocab,
        idf=idf,
        classes=classes,
        weights=weights,
        bias=bias,
        epochs=epochs,
        learning_rate=learning_rate,
        l2=l2,
        seed=seed,
        losses=losses,
    )


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def report_from_labels(true: list[AttackClass], pred: list[AttackClass]) -> dict:
    """Per-class precision/recall/F1/support plus accuracy and averages.

    Works directly from label lists so any confusion pattern can be scored
    independently of a model. Classes appear in sorted-name order; macro
    averages are unweighted means, weighted averages are support-weighted.
    A class never predicted gets precision 0.
    """
    if len(true) != len(pred):
        raise TrainingError(f"label lists differ in length: {len(true)} vs {len(pred)}")
    if not true:
        raise TrainingError("cannot build a report from zero labels")
    classes = sorted(set(true) | set(pred), key=lambda c: c.name)
    per_class = {}
    macro = np.zeros(3)
    weighted = np.zeros(3)
    correct = 0
    for cls in classes:
        tp = sum(1 for t, p in zip(true, pred) if t == cls and p == cls)
        fp = sum(1 for t, p in zip(true, pred) if t != cls and p == cls)
        fn = sum(1 for t, p in zip(true, pred) if t == cls and p != cls)
        precision, recall, f1 = _prf(tp, fp, fn)
        per_class[cls.name] = {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "support": tp + fn,
        }
        macro += (precision, recall, f1)
        weighted += np.array((precision, recall, f1)) * (tp + fn)
        correct += tp
    n = len(true)
    macro /= len(classes)
    weighted /= n
    return {
        "per_class": per_class,
        "accuracy": correct / n,
        "macro": {"precision": macro[0], "recall": macro[1], "f1": macro[2]},
        "weighted": {"precision": weighted[0], "recall": weighted[1], "f1": weighted[2]},
        "n_samples": n,
    }


def classification_report(model: SurrogateClassifier, corpus: Corpus) -> dict:
    """Evaluate the model on a labeled corpus; see report_from_labels."""
    true = [r.cls for r in corpus]
    pred = model.predict([r.text for r in corpus])
    return report_from_labels(true, pred)


def save_model(model: SurrogateClassifier, path: str | Path) -> None:
    """Persist the full model (vocabulary, idf, weights) as JSON."""
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": MODEL_KIND,
        "classes": [c.name for c in model.classes],
        "vocab": list(model.vocab.tokens),
        "df": list(model.vocab.df),
        "n_docs": model.vocab.n_docs,
        "ngrams": model.vocab.ngrams,
        "idf": model.idf.tolist(),
        "weights": model.weights.tolist(),
        "bias": model.bias.tolist(),
        "epochs": model.epochs,
        "learning_rate": model.learning_rate,
        "l2": model.l2,
        "seed": model.seed,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> SurrogateClassifier:
    """Load a model saved by save_model; rejects unknown format versions."""
    path = Path(path)
    if not path.is_file():
        raise TrainingError(f"model file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TrainingError(f"{path}: invalid JSON: {exc}") from None
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise TrainingError(f"{path}: unsupported format_version {version!r}, expected {FORMAT_VERSION}")
    kind = payload.get("kind")
    if kind != MODEL_KIND:
        raise TrainingError(f"{path}: not a surrogate model file (kind={kind!r})")
    for key in ("classes", "vocab", "df", "n_docs", "idf", "weights", "bias"):
        if key not in payload:
            raise TrainingError(f"{path}: missing field {key!r}")
    vocab = Vocabulary(
        tokens=tuple(payload["vocab"]),
        df=tuple(int(d) for d in payload["df"]),
        n_docs=int(payload["n_docs"]),
        ngrams=int(payload.get("ngrams", 1)),
    )
    classes = tuple(AttackClass(name) for name in payload["classes"])
    idf = np.asarray(payload["idf"], dtype=np.float64)
    weights = np.asarray(payload["weights"], dtype=np.float64)
    bias = np.asarray(payload["bias"], dtype=np.float64)
    if idf.shape != (len(vocab),):
        raise TrainingError(f"{path}: idf length {idf.shape} does not match vocabulary")
    if weights.shape != (len(classes), len(vocab)):
        raise TrainingError(f"{path}: weight shape {weights.shape} does not match classes x vocab")
    if bias.shape != (len(classes),):
        raise TrainingError(f"{path}: bias shape {bias.shape} does not match class count")
    return SurrogateClassifier(
        vocab=vocab,
        idf=idf,
        classes=classes,
        weights=weights,
        bias=bias,
        epochs=int(payload.get("epochs", 0)),
        learning_rate=float(payload.get("learning_rate", 0.0)),
        l2=float(payload.get("l2", 0.0)),
        seed=int(payload.get("seed", 0)),
    )
