from __future__ import annotations

from pathlib import Path

import pytest

from ragvenom import attacker, corpus, lexsem, surrogate

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def store():
    return lexsem.load_vectors(FIXTURES / "vectors.txt")


@pytest.fixture(scope="session")
def corpus_records():
    return corpus.load_corpus_csv(FIXTURES / "corpus.csv")


@pytest.fixture(scope="session")
def originals():
    return corpus.load_corpus_csv(FIXTURES / "originals.csv")


@pytest.fixture(scope="session")
def split(corpus_records):
    return corpus.split_shuffled(corpus_records, ratio=0.8, seed=42)


@pytest.fixture(scope="session")
def model(split):
    return surrogate.fit(split.train)


@pytest.fixture(scope="session")
def attack_config():
    return attacker.AttackConfig()


@pytest.fixture(scope="session")
def rewrites(model, store, attack_config, originals):
    return attacker.attack_all(model, store, attack_config, originals)
