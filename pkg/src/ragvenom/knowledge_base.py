"""Embedded knowledge base: retrieval by label or similarity, and poisoning.

Entries are attack descriptions (one per class) and device specifications,
each embedded with the mean-of-word-vectors sentence embedding under one
fixed vector store. Similarity retrieval is an exhaustive cosine scan, which
doubles as its own oracle at desk scale. Poisoning swaps successful
adversarial rewrites into the matching description entries and recomputes
their embeddings; everything else stays byte-identical.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .attacker import AdversarialRewrite
from .corpus import AttackClass, DescriptionRecord
from .errors import KnowledgeBaseError
from .lexsem import WordVectorStore, cosine, embed_sentence, is_zero_sentinel
from .surrogate import SurrogateClassifier, tokenize

FORMAT_VERSION = 1

KINDS = ("attack_description", "device_spec")


def _slug(label: str) -> str:
    return re.sub(r"[^a-z0-9]+", "-", label.lower()).strip("-")


@dataclass(frozen=True)
class KbEntry:
    """One embedded knowledge-base record."""

    id: str
    kind: str
    label: str
    text: str
    embedding: np.ndarray

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise KnowledgeBaseError(f"invalid entry kind {self.kind!r}; expected one of {KINDS}")
        if not self.text.strip():
            raise KnowledgeBaseError(f"entry {self.id!r} has empty text")


@dataclass(frozen=True)
class RetrievalResult:
    """An entry together with its cosine score against the query."""

    entry: KbEntry
    score: float


@dataclass(frozen=True)
class PoisonedLabel:
    """Post-poisoning facts for one replaced description."""

    label: str
    prediction: str
    sentence_sim: float
    substitution_count: int


@dataclass(frozen=True)
class PoisonReport:
    """Which labels were replaced, and which rewrites were left unapplied."""

    applied: tuple[PoisonedLabel, ...]
    untouched: tuple[tuple[str, str], ...]  # (label, reason)


@dataclass
class KnowledgeBase:
    """Entry list plus a (kind, label) index, bound to its vector store.

    Mutation happens only through poison(), which prepares the complete new
    entry list before swapping it in, so readers never observe a partially
    applied batch.
    """

    entries: list[KbEntry]
    store: WordVectorStore
    poisoned_labels: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._reindex()

    def _reindex(self) -> None:
        index: dict[tuple[str, str], str] = {}
        ids: set[str] = set()
        for entry in self.entries:
            key = (entry.kind, entry.label)
            if key in index:
                raise KnowledgeBaseError(f"duplicate entry for {key}")
            if entry.id in ids:
                raise KnowledgeBaseError(f"duplicate entry id {entry.id!r}")
            index[key] = entry.id
            ids.add(entry.id)
        self._index = index
        self._by_id = {e.id: e for e in self.entries}

    def entry_by_id(self, entry_id: str) -> KbEntry:
        try:
            return self._by_id[entry_id]
        except KeyError:
            raise KnowledgeBaseError(f"no entry with id {entry_id!r}") from None


def build_kb(
    descriptions: list[DescriptionRecord],
    devices: dict[str, str],
    store: WordVectorStore,
) -> KnowledgeBase:
    """Embed one description entry per class plus one entry per device.

    A text whose tokens are all outside the vector store cannot be indexed;
    that is an error naming the entry rather than a silent zero embedding.
    """
    entries: list[KbEntry] = []
    for rec in descriptions:
        entries.append(_make_entry("attack_description", rec.cls.name, rec.text, store))
    for name, text in devices.items():
        entries.append(_make_entry("device_spec", name, text, store))
    return KnowledgeBase(entries=entries, store=store)


def _make_entry(kind: str, label: str, text: str, store: WordVectorStore) -> KbEntry:
    embedding = embed_sentence(store, tokenize(text))
    if is_zero_sentinel(embedding):
        raise KnowledgeBaseError(
            f"entry ({kind}, {label!r}) embeds to the zero sentinel: no token of its text is in the vector store"
        )
    prefix = "attack" if kind == "attack_description" else "device"
    return KbEntry(id=f"{prefix}:{_slug(label)}", kind=kind, label=label, text=text, embedding=embedding)


def retrieve(
    kb: KnowledgeBase,
    query: str,
    k: int,
    kind: str | None = None,
) -> list[RetrievalResult]:
    """Top-k entries by cosine similarity to the embedded query.

    Exhaustive scan over entries of the requested kind (all kinds when
    None); descending score, ties broken by ascending entry id.
    """
    if k < 1:
        raise KnowledgeBaseError(f"k must be >= 1, got {k}")
    if kind is not None and kind not in KINDS:
        raise KnowledgeBaseError(f"invalid kind filter {kind!r}; expected one of {KINDS}")
    q = embed_sentence(kb.store, tokenize(query))
    if is_zero_sentinel(q):
        raise KnowledgeBaseError("query embeds to the zero sentinel; cannot rank by similarity")
    scored = [
        RetrievalResult(entry, cosine(q, entry.embedding))
        for entry in kb.entries
        if kind is None or entry.kind == kind
    ]
    scored.sort(key=lambda r: (-r.score, r.entry.id))
    return scored[:k]


def retrieve_by_label(
    kb: KnowledgeBase,
    label: AttackClass | str,
    kind: str = "attack_description",
) -> KbEntry:
    """The unique entry for (kind, label); the path scenario prompts use."""
    name = label.name if isinstance(label, AttackClass) else label
    if kind not in KINDS:
        raise KnowledgeBaseError(f"invalid kind {kind!r}; expected one of {KINDS}")
    entry_id = kb._index.get((kind, name))
    if entry_id is None:
        raise KnowledgeBaseError(f"no {kind} entry for label {name!r}")
    return kb.entry_by_id(entry_id)


def poison(
    kb: KnowledgeBase,
    rewrites: list[AdversarialRewrite],
    model: SurrogateClassifier,
) -> PoisonReport:
    """Replace description texts with successful adversarial rewrites.

    Unsuccessful or skipped rewrites are reported untouched. The whole
    batch is prepared before the knowledge base is updated; embeddings of
    replaced entries are recomputed under the bound vector store.
    """
    for rw in rewrites:
        if (("attack_description", rw.cls.name)) not in kb._index:
            raise KnowledgeBaseError(f"rewrite targets label {rw.cls.name!r} absent from the knowledge base")
    replacements: dict[str, AdversarialRewrite] = {}
    untouched: list[tuple[str, str]] = []
    for rw in rewrites:
        if rw.skipped:
            untouched.append((rw.cls.name, "skipped: surrogate misclassified the original"))
        elif not rw.success:
            untouched.append((rw.cls.name, "attack failed: prediction never flipped"))
        else:
            replacements[rw.cls.name] = rw

    applied: list[PoisonedLabel] = []
    new_entries: list[KbEntry] = []
    for entry in kb.entries:
        rw = replacements.get(entry.label) if entry.kind == "attack_description" else None
        if rw is None:
            new_entries.append(entry)
            continue
        new_entries.append(_make_entry(entry.kind, entry.label, rw.perturbed_text, kb.store))
        prediction = model.predict([rw.perturbed_text])[0]
        applied.append(
            PoisonedLabel(
                label=entry.label,
                prediction=prediction.name,
                sentence_sim=rw.sentence_sim,
                substitution_count=len(rw.substitutions),
            )
        )
    kb.entries = new_entries
    kb._reindex()
    kb.poisoned_labels = sorted(set(kb.poisoned_labels) | set(replacements))
    return PoisonReport(applied=tuple(applied), untouched=tuple(untouched))


def corruption_metrics(
    before: KnowledgeBase,
    after: KnowledgeBase,
    model: SurrogateClassifier,
) -> dict[str, dict]:
    """Per-label poisoning summary: changed flag, text similarity, flip flag.

    Both knowledge bases must cover the same description labels; similarity
    is the sentence-embedding cosine between the before and after texts.
    """
    before_map = {e.label: e for e in before.entries if e.kind == "attack_description"}
    after_map = {e.label: e for e in after.entries if e.kind == "attack_description"}
    if set(before_map) != set(after_map):
        raise KnowledgeBaseError(
            f"label sets differ: {sorted(set(before_map) ^ set(after_map))}"
        )
    metrics: dict[str, dict] = {}
    for label in sorted(before_map):
        b, a = before_map[label], after_map[label]
        changed = b.text != a.text
        sim = 1.0 if not changed else cosine(
            embed_sentence(before.store, tokenize(b.text)),
            embed_sentence(after.store, tokenize(a.text)),
        )
        prediction = model.predict([a.text])[0]
        metrics[label] = {
            "changed": changed,
            "sentence_sim": sim,
            "flipped": prediction.name != label,
            "prediction": prediction.name,
        }
    return metrics


def save_kb(kb: KnowledgeBase, path: str | Path) -> None:
    """Persist the knowledge base with the vector store's content hash."""
    payload = {
        "format_version": FORMAT_VERSION,
        "store_hash": kb.store.content_hash,
        "poisoned_labels": list(kb.poisoned_labels),
        "entries": [
            {
                "id": e.id,
                "kind": e.kind,
                "label": e.label,
                "text": e.text,
                "embedding": e.embedding.tolist(),
            }
            for e in kb.entries
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def load_kb(path: str | Path, store: WordVectorStore) -> KnowledgeBase:
    """Load a knowledge base, verifying it was built under this store.

    A hash mismatch means the vector file drifted since the KB was built;
    embeddings would silently disagree, so this is an error.
    """
    path = Path(path)
    if not path.is_file():
        raise KnowledgeBaseError(f"knowledge-base file not found: {path}")
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise KnowledgeBaseError(f"{path}: invalid JSON: {exc}") from None
    version = payload.get("format_version")
    if version != FORMAT_VERSION:
        raise KnowledgeBaseError(f"{path}: unsupported format_version {version!r}, expected {FORMAT_VERSION}")
    recorded = payload.get("store_hash")
    if recorded != store.content_hash:
        raise KnowledgeBaseError(
            f"{path}: vector store drift: knowledge base was built under hash {recorded!r}, "
            f"active store is {store.content_hash!r}"
        )
    entries = [
        KbEntry(
            id=e["id"],
            kind=e["kind"],
            label=e["label"],
            text=e["text"],
            embedding=np.asarray(e["embedding"], dtype=np.float64),
        )
        for e in payload.get("entries", [])
    ]
    return KnowledgeBase(
        entries=entries,
        store=store,
        poisoned_labels=list(payload.get("poisoned_labels", [])),
    )
