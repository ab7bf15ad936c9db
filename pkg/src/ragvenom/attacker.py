"""Greedy word-substitution attack against the surrogate classifier.

The attack ranks token positions by deletion-based importance, then walks
them in descending order, swapping each word for the synonym candidate that
best degrades the true-class probability while holding three constraints:
word-level cosine similarity, POS agreement in context, and sentence-level
cosine similarity to the original text. It stops at the first substitution
set that flips the surrogate's prediction, or reports failure once the
substitution budget or position list is exhausted.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import AttackClass, DescriptionRecord
from .errors import ToolkitError
from .lexsem import (
    SynonymCandidate,
    WordVectorStore,
    cosine,
    default_stopwords,
    embed_sentence,
    is_zero_sentinel,
    nearest_synonyms,
    pos_tag,
)
from .surrogate import SurrogateClassifier, tokenize_with_spans

NEG_INF = float("-inf")


@dataclass(frozen=True)
class AttackConfig:
    """Constraint thresholds and budget for the substitution search.

    ``seed`` is provenance only: the greedy search itself is deterministic,
    with ties broken by earlier position, then lexicographically smaller
    replacement.
    """

    sentence_sim_threshold: float = 0.70
    word_sim_threshold: float = 0.50
    max_candidates: int = 50
    max_perturb_fraction: float = 0.40
    stopwords: frozenset[str] = field(default_factory=default_stopwords)
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.sentence_sim_threshold <= 1.0:
            raise ToolkitError(f"sentence_sim_threshold must be in (0, 1], got {self.sentence_sim_threshold}")
        if not 0.0 < self.word_sim_threshold <= 1.0:
            raise ToolkitError(f"word_sim_threshold must be in (0, 1], got {self.word_sim_threshold}")
        if self.max_candidates < 1:
            raise ToolkitError(f"max_candidates must be >= 1, got {self.max_candidates}")
        if not 0.0 < self.max_perturb_fraction <= 1.0:
            raise ToolkitError(f"max_perturb_fraction must be in (0, 1], got {self.max_perturb_fraction}")

    def to_dict(self) -> dict:
        return {
            "sentence_sim_threshold": self.sentence_sim_threshold,
            "word_sim_threshold": self.word_sim_threshold,
            "max_candidates": self.max_candidates,
            "max_perturb_fraction": self.max_perturb_fraction,
            "stopwords": sorted(self.stopwords),
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "AttackConfig":
        kwargs = dict(obj)
        if "stopwords" in kwargs:
            kwargs["stopwords"] = frozenset(kwargs["stopwords"])
        return cls(**kwargs)


@dataclass(frozen=True)
class Substitution:
    """One committed word swap at a fixed token position."""

    position: int
    original: str
    replacement: str
    word_sim: float


@dataclass(frozen=True)
class AdversarialRewrite:
    """Outcome of one attack: the perturbed text and its full provenance.

    ``skipped`` marks originals the surrogate already misclassified; those
    are never perturbed, so the usual success/pred invariants do not apply
    to them. ``queries_used`` counts surrogate probability calls made on
    behalf of this record.
    """

    cls: AttackClass
    original_text: str
    perturbed_text: str
    substitutions: tuple[Substitution, ...]
    sentence_sim: float
    pred_before: AttackClass
    pred_after: AttackClass
    success: bool
    queries_used: int
    skipped: bool = False


class _CountingModel:
    """Wraps the surrogate to count probability queries."""

    def __init__(self, model: SurrogateClassifier) -> None:
        self._model = model
        self.queries = 0

    def probs(self, text: str) -> np.ndarray:
        self.queries += 1
        return self._model.predict_proba([text])[0]


def word_importance(
    model: SurrogateClassifier,
    tokens: list[str],
    true_class: AttackClass,
    stopwords: frozenset[str] = frozenset(),
    _counter: _CountingModel | None = None,
    _full_probs: np.ndarray | None = None,
) -> np.ndarray:
    """Deletion-based importance score per token position.

    With x the full text and x\\i the text minus token i: the score is the
    drop in true-class probability, plus, when the deletion already changes
    the argmax, the gain of the new top class. Stopword positions score
    -inf so the search never selects them.
    """
    if not tokens:
        raise ToolkitError("word_importance requires at least one token")
    counter = _counter or _CountingModel(model)
    y = model.class_index(true_class)
    full = _full_probs if _full_probs is not None else counter.probs(" ".join(tokens))
    scores = np.full(len(tokens), NEG_INF, dtype=np.float64)
    for i, token in enumerate(tokens):
        if token in stopwords:
            continue
        reduced = tokens[:i] + tokens[i + 1 :]
        probs = counter.probs(" ".join(reduced))
        top = int(np.argmax(probs))
        drop = full[y] - probs[y]
        if top == y:
            scores[i] = drop
        else:
            scores[i] = drop + (probs[top] - full[top])
    return scores


def generate_candidates(
    config: AttackConfig,
    store: WordVectorStore,
    tokens: list[str],
    position: int,
) -> list[SynonymCandidate]:
    """Constraint-checked replacement candidates for one position.

    Pulls nearest synonyms above the word-similarity threshold, then keeps
    only non-stopword candidates whose POS tag, computed in the sentence
    with the candidate substituted in, matches the original token's tag.
    Tokens absent from the vector store yield an empty list.
    """
    if not 0 <= position < len(tokens):
        raise ToolkitError(f"position {position} out of range for {len(tokens)} tokens")
    token = tokens[position]
    if token not in store:
        return []
    original_tag = pos_tag(tokens)[position]
    kept: list[SynonymCandidate] = []
    for cand in nearest_synonyms(store, token, config.max_candidates, config.word_sim_threshold):
        if cand.token in config.stopwords:
            continue
        swapped = list(tokens)
        swapped[position] = cand.token
        if pos_tag(swapped)[position] != original_tag:
            continue
        kept.append(cand)
    return kept


def _splice(text: str, spans: list[tuple[int, int]], replacements: dict[int, str]) -> str:
    """Rebuild the text with replacement tokens spliced at original spans."""
    if not replacements:
        return text
    parts: list[str] = []
    cursor = 0
    for i, (start, end) in enumerate(spans):
        if i in replacements:
            parts.append(text[cursor:start])
            parts.append(replacements[i])
            cursor = end
    parts.append(text[cursor:])
    return "".join(parts)


def substitution_budget(n_tokens: int, max_perturb_fraction: float) -> int:
    """Largest substitution count not exceeding the configured fraction."""
    return int(math.floor(max_perturb_fraction * n_tokens + 1e-9))


def greedy_attack(
    model: SurrogateClassifier,
    store: WordVectorStore,
    config: AttackConfig,
    record: DescriptionRecord,
) -> AdversarialRewrite:
    """Attack one description; see the module docstring for the procedure.

    An original the surrogate already misclassifies is returned as a
    skipped outcome with no perturbation. Sentence similarity is always
    measured against the original text, never incrementally.
    """
    counter = _CountingModel(model)
    full_probs = counter.probs(record.text)
    pred_before = model.classes[int(np.argmax(full_probs))]
    if pred_before != record.cls:
        return AdversarialRewrite(
            cls=record.cls,
            original_text=record.text,
            perturbed_text=record.text,
            substitutions=(),
            sentence_sim=1.0,
            pred_before=pred_before,
            pred_after=pred_before,
            success=False,
            queries_used=counter.queries,
            skipped=True,
        )

    spans_tokens = tokenize_with_spans(record.text)
    tokens = [t for t, _, _ in spans_tokens]
    spans = [(s, e) for _, s, e in spans_tokens]
    y = model.class_index(record.cls)

    def failure(committed: dict[int, SynonymCandidate], final_sim: float, final_probs: np.ndarray) -> AdversarialRewrite:
        subs = tuple(
            Substitution(i, tokens[i], committed[i].token, committed[i].word_sim)
            for i in sorted(committed)
        )
        return AdversarialRewrite(
            cls=record.cls,
            original_text=record.text,
            perturbed_text=_splice(record.text, spans, {i: c.token for i, c in committed.items()}),
            substitutions=subs,
            sentence_sim=final_sim,
            pred_before=record.cls,
            pred_after=model.classes[int(np.argmax(final_probs))],
            success=False,
            queries_used=counter.queries,
            skipped=False,
        )

    if not tokens:
        return failure({}, 1.0, full_probs)

    budget = substitution_budget(len(tokens), config.max_perturb_fraction)
    orig_embedding = embed_sentence(store, tokens)
    if budget == 0 or is_zero_sentinel(orig_embedding):
        return failure({}, 1.0, full_probs)

    importance = word_importance(
        model, tokens, record.cls, config.stopwords, _counter=counter, _full_probs=full_probs
    )
    order = sorted(
        (i for i in range(len(tokens)) if importance[i] > NEG_INF),
        key=lambda i: (-importance[i], i),
    )

    working = list(tokens)
    committed: dict[int, SynonymCandidate] = {}
    current_p_true = float(full_probs[y])
    current_sim = 1.0
    current_probs = full_probs

    for position in order:
        if len(committed) >= budget:
            break
        candidates = generate_candidates(config, store, working, position)
        if not candidates:
            continue

        flips: list[tuple[float, str, SynonymCandidate, np.ndarray]] = []
        best_reduction: tuple[float, str, SynonymCandidate, np.ndarray, float] | None = None
        for cand in candidates:
            swapped = list(working)
            swapped[position] = cand.token
            cand_embedding = embed_sentence(store, swapped)
            if is_zero_sentinel(cand_embedding):
                continue
            sim = cosine(orig_embedding, cand_embedding)
            if sim < config.sentence_sim_threshold:
                continue
            cand_text = _splice(record.text, spans, {**{i: c.token for i, c in committed.items()}, position: cand.token})
            probs = counter.probs(cand_text)
            if int(np.argmax(probs)) != y:
                flips.append((sim, cand.token, cand, probs))
            else:
                p_true = float(probs[y])
                key = (p_true, cand.token)
                if best_reduction is None or key < (best_reduction[0], best_reduction[1]):
                    best_reduction = (p_true, cand.token, cand, probs, sim)

        if flips:
            flips.sort(key=lambda f: (-f[0], f[1]))
            sim, _, cand, probs = flips[0]
            committed[position] = cand
            subs = tuple(
                Substitution(i, tokens[i], committed[i].token, committed[i].word_sim)
                for i in sorted(committed)
            )
            return AdversarialRewrite(
                cls=record.cls,
                original_text=record.text,
                perturbed_text=_splice(record.text, spans, {i: c.token for i, c in committed.items()}),
                substitutions=subs,
                sentence_sim=sim,
                pred_before=record.cls,
                pred_after=model.classes[int(np.argmax(probs))],
                success=True,
                queries_used=counter.queries,
                skipped=False,
            )

        if best_reduction is not None and best_reduction[0] < current_p_true:
            p_true, _, cand, probs, sim = best_reduction
            committed[position] = cand
            working[position] = cand.token
            current_p_true = p_true
            current_sim = sim
            current_probs = probs

    return failure(committed, current_sim if committed else 1.0, current_probs)


def attack_all(
    model: SurrogateClassifier,
    store: WordVectorStore,
    config: AttackConfig,
    originals: list[DescriptionRecord],
) -> list[AdversarialRewrite]:
    """Attack each original independently, preserving input order."""
    return [greedy_attack(model, store, config, rec) for rec in originals]


def check_rewrite(
    rewrite: AdversarialRewrite,
    model: SurrogateClassifier,
    store: WordVectorStore,
    config: AttackConfig,
) -> list[str]:
    """Re-verify a rewrite's claims independently of the attack loop.

    Returns a list of violated constraints (empty when the rewrite is
    sound): prediction flip matches the success flag, sentence similarity
    and per-substitution word similarities meet their thresholds, POS tags
    agree at every substituted position, and the budget holds.
    """
    problems: list[str] = []
    if rewrite.skipped:
        if rewrite.substitutions or rewrite.perturbed_text != rewrite.original_text:
            problems.append("skipped rewrite must carry no perturbation")
        return problems

    tokens = [t for t, _, _ in tokenize_with_spans(rewrite.original_text)]
    pred_after = model.predict([rewrite.perturbed_text])[0]
    if pred_after != rewrite.pred_after:
        problems.append(f"recorded pred_after {rewrite.pred_after.name!r} differs from model ({pred_after.name!r})")
    if rewrite.success != (pred_after != rewrite.cls):
        problems.append("success flag disagrees with the recomputed prediction flip")

    if rewrite.success:
        emb_a = embed_sentence(store, tokens)
        emb_b = embed_sentence(store, [t for t, _, _ in tokenize_with_spans(rewrite.perturbed_text)])
        if is_zero_sentinel(emb_a) or is_zero_sentinel(emb_b):
            problems.append("sentence embedding degenerated to the zero sentinel")
        else:
            sim = cosine(emb_a, emb_b)
            if sim < config.sentence_sim_threshold:
                problems.append(f"sentence similarity {sim:.4f} below threshold {config.sentence_sim_threshold}")
            if abs(sim - rewrite.sentence_sim) > 1e-9:
                problems.append(f"recorded sentence_sim {rewrite.sentence_sim:.6f} differs from recomputed {sim:.6f}")

    if len(rewrite.substitutions) > substitution_budget(len(tokens), config.max_perturb_fraction):
        problems.append("substitution count exceeds the perturbation budget")

    tags = pos_tag(tokens)
    perturbed_tokens = list(tokens)
    for sub in rewrite.substitutions:
        if not 0 <= sub.position < len(tokens):
            problems.append(f"substitution position {sub.position} out of range")
            continue
        if tokens[sub.position] != sub.original:
            problems.append(f"position {sub.position}: recorded original {sub.original!r} does not match text")
        if sub.replacement == sub.original:
            problems.append(f"position {sub.position}: replacement equals original")
        if sub.replacement not in store or sub.original not in store:
            problems.append(f"position {sub.position}: substitution tokens must come from the vector store")
        else:
            word_sim = cosine(store.vector(sub.original), store.vector(sub.replacement))
            if word_sim < config.word_sim_threshold:
                problems.append(f"position {sub.position}: word similarity {word_sim:.4f} below threshold")
            if abs(word_sim - sub.word_sim) > 1e-9:
                problems.append(f"position {sub.position}: recorded word_sim differs from recomputed")
        perturbed_tokens[sub.position] = sub.replacement
        if pos_tag(perturbed_tokens)[sub.position] != tags[sub.position]:
            problems.append(f"position {sub.position}: POS tag changed by the substitution")
    return problems


def save_rewrites(rewrites: list[AdversarialRewrite], config: AttackConfig, path: str | Path) -> None:
    """Write one JSON object per line, each echoing the attack config."""
    config_echo = config.to_dict()
    with Path(path).open("w", encoding="utf-8") as fh:
        for rw in rewrites:
            obj = {
                "class": rw.cls.name,
                "original_text": rw.original_text,
                "perturbed_text": rw.perturbed_text,
                "substitutions": [
                    {
                        "position": s.position,
                        "original": s.original,
                        "replacement": s.replacement,
                        "word_sim": s.word_sim,
                    }
                    for s in rw.substitutions
                ],
                "sentence_sim": rw.sentence_sim,
                "pred_before": rw.pred_before.name,
                "pred_after": rw.pred_after.name,
                "success": rw.success,
                "skipped": rw.skipped,
                "queries_used": rw.queries_used,
                "config": config_echo,
            }
            fh.write(json.dumps(obj) + "\n")


def load_rewrites(path: str | Path) -> tuple[list[AdversarialRewrite], AttackConfig | None]:
    """Read rewrites saved by save_rewrites, plus the echoed config."""
    path = Path(path)
    if not path.is_file():
        raise ToolkitError(f"rewrites file not found: {path}")
    rewrites: list[AdversarialRewrite] = []
    config: AttackConfig | None = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ToolkitError(f"{path}: line {lineno}: invalid JSON: {exc}") from None
        if config is None and "config" in obj:
            config = AttackConfig.from_dict(obj["config"])
        rewrites.append(
            AdversarialRewrite(
                cls=AttackClass(obj["class"]),
                original_text=obj["original_text"],
                perturbed_text=obj["perturbed_text"],
                substitutions=tuple(
                    Substitution(s["position"], s["original"], s["replacement"], s["word_sim"])
                    for s in obj["substitutions"]
                ),
                sentence_sim=float(obj["sentence_sim"]),
                pred_before=AttackClass(obj["pred_before"]),
                pred_after=AttackClass(obj["pred_after"]),
                success=bool(obj["success"]),
                queries_used=int(obj["queries_used"]),
                skipped=bool(obj.get("skipped", False)),
            )
        )
    return rewrites, config
