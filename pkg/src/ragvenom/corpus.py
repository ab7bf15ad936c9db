"""Attack-description corpus: loading, label canonicalization, and splitting.

The corpus is a flat list of labeled description texts. Labels are
canonicalized onto a fixed 18-class set; the default label map additionally
folds common raw dataset aliases (bracket/slash groupings and DDoS-prefixed
forms) onto those classes. CSV is the single interchange format:
``text,label[,origin]``, UTF-8, RFC-4180 quoting.
"""

from __future__ import annotations

import csv
import logging
import math
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusError

log = logging.getLogger(__name__)

ORIGINS = ("original", "paraphrase", "adversarial")

#: Canonical class labels. Raw dataset labels are folded onto these.
CANONICAL_CLASSES: tuple[str, ...] = (
    "ARP Spoofing",
    "Backdoor",
    "Cross-Site Scripting",
    "DNS Spoofing",
    "Dictionary Brute Force",
    "HTTP Flood",
    "ICMP Flood",
    "MITM",
    "OS Scanning",
    "Password Cracking",
    "Port Scanning",
    "SQL Injection",
    "SYN Flood",
    "TCP Flood",
    "TCP SYN Flood",
    "UDP Flood",
    "Uploading",
    "Vulnerability Scanning",
)

#: Raw label aliases beyond the identity mappings of the canonical classes.
_DEFAULT_ALIASES: dict[str, str] = {
    "OS Fingerprinting": "OS Scanning",
    "XSS": "Cross-Site Scripting",
    "Uploading Attack": "Uploading",
    "MITM ARP Spoofing": "ARP Spoofing",
    "MITM DNS Spoofing": "DNS Spoofing",
    "DDoS TCP Flood": "TCP Flood",
    "DDoS SYN Flood": "SYN Flood",
    "DDoS TCP SYN Flood": "TCP SYN Flood",
    "DDoS UDP Flood": "UDP Flood",
    "DDoS HTTP Flood": "HTTP Flood",
    "DDoS ICMP Flood": "ICMP Flood",
}


@dataclass(frozen=True)
class AttackClass:
    """One canonical attack class label."""

    name: str

    def __post_init__(self) -> None:
        if not self.name or not self.name.strip():
            raise CorpusError("attack class name must be non-empty")

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class LabelMap:
    """Total mapping from raw dataset labels to canonical classes.

    Lookup is exact-match after trimming and case-folding; many raw labels
    may map onto one canonical class.
    """

    entries: dict[str, AttackClass]

    def __post_init__(self) -> None:
        folded = {_fold(raw): cls for raw, cls in self.entries.items()}
        object.__setattr__(self, "_folded", folded)

    def lookup(self, raw: str) -> AttackClass:
        key = _fold(raw)
        try:
            return self._folded[key]  # type: ignore[attr-defined]
        except KeyError:
            raise CorpusError(f"unknown raw label: {raw!r}") from None

    @property
    def canonical_classes(self) -> set[AttackClass]:
        return set(self.entries.values())


def _fold(raw: str) -> str:
    return raw.strip().casefold()


def default_label_map() -> LabelMap:
    """Identity map over the 18 canonical classes plus known raw aliases."""
    entries = {name: AttackClass(name) for name in CANONICAL_CLASSES}
    entries.update({raw: AttackClass(cls) for raw, cls in _DEFAULT_ALIASES.items()})
    return LabelMap(entries)


def label_map_from_json(obj: dict[str, str]) -> LabelMap:
    """Build a LabelMap from a ``{raw: canonical}`` JSON object."""
    return LabelMap({raw: AttackClass(cls) for raw, cls in obj.items()})


def canonicalize_label(raw: str, map: LabelMap) -> AttackClass:
    """Resolve a raw dataset label to its canonical class."""
    return map.lookup(raw)


@dataclass(frozen=True)
class DescriptionRecord:
    """One attack-description text with its class and provenance."""

    cls: AttackClass
    text: str
    origin: str = "paraphrase"

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise CorpusError("description text must be non-empty")
        if self.origin not in ORIGINS:
            raise CorpusError(f"invalid origin {self.origin!r}; expected one of {ORIGINS}")


Corpus = list[DescriptionRecord]


@dataclass
class SplitCorpus:
    """Stratified train/test split, reproducible from its seed."""

    train: Corpus
    test: Corpus
    seed: int
    ratio: float = 0.8

    def classes(self) -> list[AttackClass]:
        return sorted({r.cls for r in self.train} | {r.cls for r in self.test}, key=lambda c: c.name)


def load_corpus_csv(path: str | Path, map: LabelMap | None = None) -> Corpus:
    """Load a ``text,label[,origin]`` CSV into a Corpus.

    Labels are canonicalized through ``map`` (default map when omitted) and
    origin defaults to ``paraphrase``. Errors carry the 1-based line number
    of the offending row.
    """
    map = map or default_label_map()
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"corpus file not found: {path}")
    records: Corpus = []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CorpusError(f"{path}: empty file, expected header 'text,label'") from None
        if [h.strip() for h in header[:2]] != ["text", "label"]:
            raise CorpusError(f"{path}: line 1: expected header 'text,label[,origin]', got {header!r}")
        has_origin = len(header) >= 3 and header[2].strip() == "origin"
        for row in reader:
            line = reader.line_num
            if not row:
                continue
            if len(row) < 2:
                raise CorpusError(f"{path}: line {line}: expected at least 2 fields, got {len(row)}")
            text, raw_label = row[0], row[1]
            if not text.strip():
                raise CorpusError(f"{path}: line {line}: empty text field")
            try:
                cls = map.lookup(raw_label)
            except CorpusError as exc:
                raise CorpusError(f"{path}: line {line}: {exc}") from None
            origin = "paraphrase"
            if has_origin and len(row) >= 3 and row[2].strip():
                origin = row[2].strip()
                if origin not in ORIGINS:
                    raise CorpusError(f"{path}: line {line}: invalid origin {origin!r}")
            records.append(DescriptionRecord(cls, text, origin))
    return records


def save_corpus_csv(corpus: Corpus, path: str | Path) -> None:
    """Write a Corpus back to CSV; round-trips texts byte-identically."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["text", "label", "origin"])
        for rec in corpus:
            writer.writerow([rec.text, rec.cls.name, rec.origin])


def build_from_variants(
    originals: list[DescriptionRecord],
    variants: dict[AttackClass, list[str]] | dict[str, list[str]],
) -> Corpus:
    """Assemble the training corpus from per-class paraphrase variants.

    Originals themselves are excluded (they are the attack targets).
    Duplicate variant texts within a class are dropped, first occurrence
    kept; an empty variant list skips the class with a warning.
    """
    by_name: dict[str, AttackClass] = {}
    order: list[AttackClass] = []
    for rec in originals:
        if rec.cls.name not in by_name:
            by_name[rec.cls.name] = rec.cls
            order.append(rec.cls)
    normalized: dict[str, list[str]] = {}
    for key, texts in variants.items():
        name = key.name if isinstance(key, AttackClass) else key
        if name not in by_name:
            raise CorpusError(f"variants given for class {name!r} absent from originals")
        normalized[name] = texts

    corpus: Corpus = []
    for cls in order:
        texts = normalized.get(cls.name, [])
        if not texts:
            log.warning("no variants for class %s; skipping", cls.name)
            continue
        seen: set[str] = set()
        for text in texts:
            if text in seen:
                continue
            seen.add(text)
            corpus.append(DescriptionRecord(cls, text, "paraphrase"))
    return corpus


def split_shuffled(corpus: Corpus, ratio: float = 0.8, seed: int = 0) -> SplitCorpus:
    """Stratified shuffled split: per class, first ceil(ratio*n) to train.

    Classes are processed in sorted-name order with a single seeded
    generator, so the split is a pure function of (corpus, ratio, seed).
    """
    if not 0.0 < ratio <= 1.0:
        raise CorpusError(f"split ratio must be in (0, 1], got {ratio}")
    groups: dict[str, list[DescriptionRecord]] = {}
    for rec in corpus:
        groups.setdefault(rec.cls.name, []).append(rec)
    for name, recs in groups.items():
        if len(recs) < 2:
            raise CorpusError(f"class {name!r} has {len(recs)} record(s); need at least 2 to split")

    rng = random.Random(seed)
    train: Corpus = []
    test: Corpus = []
    for name in sorted(groups):
        recs = list(groups[name])
        rng.shuffle(recs)
        cut = math.ceil(ratio * len(recs))
        train.extend(recs[:cut])
        test.extend(recs[cut:])
    if not test:
        raise CorpusError(f"ratio {ratio} leaves an empty test set; lower it")
    return SplitCorpus(train=train, test=test, seed=seed, ratio=ratio)
