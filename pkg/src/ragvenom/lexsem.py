"""Lexical-semantic services backing the attack constraints and the KB.

A word-vector store loaded from a GloVe-style text file supplies synonym
candidates; mean-of-word-vectors sentence embeddings supply the semantic
similarity constraint and the knowledge-base index; a small rule-based
tagger supplies the POS-agreement constraint. Everything here is exact and
deterministic: nearest-neighbor search is an exhaustive scan, and the tagger
is a closed-class lexicon plus fixed suffix rules.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import LexsemError, VectorFileError

log = logging.getLogger(__name__)

POS_TAGS = ("NOUN", "VERB", "ADJ", "ADV", "OTHER")

#: Suffix rules applied in order after the lexicon; first match wins.
_SUFFIX_RULES: tuple[tuple[str, str], ...] = (
    ("ly", "ADV"),
    ("ing", "VERB"),
    ("ed", "VERB"),
    ("ize", "VERB"),
    ("ise", "VERB"),
    ("ous", "ADJ"),
    ("ful", "ADJ"),
    ("ive", "ADJ"),
    ("al", "ADJ"),
    ("able", "ADJ"),
)


@dataclass(frozen=True)
class WordVectorStore:
    """Immutable token-to-vector map; every row is unit-normalized.

    ``content_hash`` is the SHA-256 of the source file bytes, recorded so
    downstream artifacts (the knowledge base) can detect vector-file drift.
    """

    tokens: tuple[str, ...]
    matrix: np.ndarray  # (n, d), rows L2-normalized
    dim: int
    content_hash: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.tokens)})

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index  # type: ignore[attr-defined]

    def vector(self, token: str) -> np.ndarray:
        idx = self._index.get(token)  # type: ignore[attr-defined]
        if idx is None:
            raise LexsemError(f"token not in vector store: {token!r}")
        return self.matrix[idx]


@dataclass(frozen=True)
class SynonymCandidate:
    """A replacement token with its cosine similarity to the query token."""

    token: str
    word_sim: float


def load_vectors(path: str | Path) -> WordVectorStore:
    """Parse a text vector file: one ``token v1 .. vd`` entry per line.

    Vectors are L2-normalized on load. A repeated token overwrites the
    earlier entry with a warning. Errors report 1-based line numbers.
    """
    path = Path(path)
    if not path.is_file():
        raise VectorFileError(f"vector file not found: {path}")
    raw = path.read_bytes()
    content_hash = hashlib.sha256(raw).hexdigest()

    entries: dict[str, np.ndarray] = {}
    order: list[str] = []
    dim: int | None = None
    for lineno, line in enumerate(raw.decode("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        token, fields = parts[0], parts[1:]
        if not fields:
            raise VectorFileError(f"{path}: line {lineno}: no vector components after token")
        try:
            vec = np.array([float(f) for f in fields], dtype=np.float64)
        except ValueError:
            raise VectorFileError(f"{path}: line {lineno}: non-numeric vector component") from None
        if dim is None:
            dim = vec.shape[0]
        elif vec.shape[0] != dim:
            raise VectorFileError(
                f"{path}: line {lineno}: dimension {vec.shape[0]} differs from established {dim}"
            )
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise VectorFileError(f"{path}: line {lineno}: zero vector cannot be normalized")
        if token in entries:
            log.warning("%s: line %d: duplicate token %r, keeping the later entry", path, lineno, token)
        else:
            order.append(token)
        entries[token] = vec / norm
    if dim is None:
        raise VectorFileError(f"{path}: no vector entries found")
    matrix = np.stack([entries[t] for t in order])
    return WordVectorStore(tokens=tuple(order), matrix=matrix, dim=dim, content_hash=content_hash)


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity clamped to [-1, 1]; rejects zero vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise LexsemError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        raise LexsemError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))


def embed_sentence(store: WordVectorStore, tokens: list[str]) -> np.ndarray:
    """Mean of in-vocabulary token vectors, re-normalized to unit length.

    Fully out-of-vocabulary input (or exact cancellation) yields the
    all-zero sentinel; similarity against the sentinel is an error the
    caller must handle.
    """
    vecs = [store.vector(t) for t in tokens if t in store]
    if not vecs:
        return np.zeros(store.dim, dtype=np.float64)
    mean = np.mean(vecs, axis=0)
    norm = float(np.linalg.norm(mean))
    if norm < 1e-12:
        return np.zeros(store.dim, dtype=np.float64)
    return mean / norm


def is_zero_sentinel(embedding: np.ndarray) -> bool:
    """True when the embedding is the fully-out-of-vocabulary sentinel."""
    return not np.any(embedding)


def nearest_synonyms(
    store: WordVectorStore,
    token: str,
    n: int,
    min_sim: float,
) -> list[SynonymCandidate]:
    """Top-n most similar stored tokens, exhaustively scanned.

    The query token itself is excluded; results are filtered to cosine
    >= min_sim and sorted by descending similarity, ties broken by
    ascending token. Raises when the token is not stored.
    """
    if token not in store:
        raise LexsemError(f"token not in vector store: {token!r}")
    if n < 0:
        raise LexsemError(f"candidate count must be >= 0, got {n}")
    if n == 0:
        return []
    sims = np.clip(store.matrix @ store.vector(token), -1.0, 1.0)
    candidates = [
        SynonymCandidate(other, float(sims[i]))
        for i, other in enumerate(store.tokens)
        if other != token and sims[i] >= min_sim
    ]
    candidates.sort(key=lambda c: (-c.word_sim, c.token))
    return candidates[:n]


def _data_text(name: str) -> str:
    return (resources.files("ragvenom") / "data" / name).read_text(encoding="utf-8")


_POS_LEXICON: dict[str, str] | None = None
_STOPWORDS: frozenset[str] | None = None


def _pos_lexicon() -> dict[str, str]:
    global _POS_LEXICON
    if _POS_LEXICON is None:
        lexicon: dict[str, str] = {}
        for lineno, line in enumerate(_data_text("pos_lexicon.txt").splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2 or parts[1] not in POS_TAGS:
                raise LexsemError(f"pos_lexicon.txt: line {lineno}: expected 'token TAG', got {line!r}")
            lexicon[parts[0].casefold()] = parts[1]
        _POS_LEXICON = lexicon
    return _POS_LEXICON


def default_stopwords() -> frozenset[str]:
    """The bundled stopword list (lowercase tokens)."""
    global _STOPWORDS
    if _STOPWORDS is None:
        words = {
            line.strip().casefold()
            for line in _data_text("stopwords.txt").splitlines()
            if line.strip() and not line.startswith("#")
        }
        _STOPWORDS = frozenset(words)
    return _STOPWORDS


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Stopwords from a user-supplied file, one token per line."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(l.strip().casefold() for l in lines if l.strip() and not l.startswith("#"))


def pos_tag(tokens: list[str]) -> list[str]:
    """Tag each token with one of NOUN, VERB, ADJ, ADV, OTHER.

    Closed-class lexicon lookup first, then suffix rules in a fixed
    priority order, defaulting to NOUN. Total and deterministic.
    """
    lexicon = _pos_lexicon()
    tags: list[str] = []
    for token in tokens:
        word = token.casefold()
        tag = lexicon.get(word)
        if tag is None:
            for suffix, rule_tag in _SUFFIX_RULES:
                if word.endswith(suffix):
                    tag = rule_tag
                    break
            else:
                tag = "NOUN"
        tags.append(tag)
    return tags
