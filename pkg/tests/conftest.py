"""
Shared fixtures: tiny corpora, tiny models and quick run configurations.

Everything here is sized so a full hop trains in well under a second.
"""

import os
import sys

import pytest

# Add parent directory to path to import application modules
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from seqft.corpus import CorpusSpec, gen_synthetic_corpus  # noqa: E402
from seqft.model import ModelConfig, init_model  # noqa: E402
from seqft.run_config import RunConfig  # noqa: E402

FIXTURES_DIR = os.path.join(os.path.dirname(__file__), "fixtures")

TINY_SPEC = CorpusSpec(
    num_langs=2,
    num_categories=2,
    tokens_per_lang=40,
    sentiment_tokens=4,
    topic_tokens=2,
    min_len=6,
    max_len=10,
    pool_per_label=10,
    train_size=12,
    test_size=8,
    seed=0,
)

# --set pairs describing the same tiny world as TINY_SPEC
TINY_OVERRIDES = [
    "corpus.num_langs=2",
    "corpus.num_categories=2",
    "corpus.tokens_per_lang=40",
    "corpus.sentiment_tokens=4",
    "corpus.topic_tokens=2",
    "corpus.min_len=6",
    "corpus.max_len=10",
    "corpus.pool_per_label=10",
    "data.train_size=12",
    "data.test_size=8",
    "sequence.hops=3",
    "train.epochs=2",
    "train.base_lr=0.001",
    "train.batch_size=4",
    "model.embed_dim=8",
    "model.num_blocks=1",
    "model.num_heads=2",
    "model.ffn_dim=16",
    "model.max_seq_len=12",
]


def tiny_model_config(vocab_size: int) -> ModelConfig:
    return ModelConfig(vocab_size=vocab_size, embed_dim=8, num_blocks=1, num_heads=2,
                       ffn_dim=16, max_seq_len=12)


@pytest.fixture
def fixtures_dir():
    return FIXTURES_DIR


@pytest.fixture
def tiny_corpus():
    """Fresh per test: sequences release pools as they go."""
    return gen_synthetic_corpus(TINY_SPEC)


@pytest.fixture
def tiny_model(tiny_corpus):
    return init_model(tiny_model_config(tiny_corpus.vocab_size), seed=7)


@pytest.fixture
def tiny_config():
    return RunConfig.load(overrides=TINY_OVERRIDES)


def write_marc_file(path: str, per_star: int, tag: str = "") -> None:
    """MARC-format JSONL covering every language, category and star rating."""
    import json
    from config import CATEGORY_NAMES, LANGUAGE_NAMES

    with open(path, "w", encoding="utf-8") as f:
        for lang in LANGUAGE_NAMES:
            for cat in CATEGORY_NAMES:
                for stars in (1, 2, 3, 4, 5):
                    for i in range(per_star):
                        mood = "good great" if stars >= 4 else "bad awful" if stars <= 2 else "fine"
                        f.write(json.dumps({
                            "review_body": f"{tag}{lang} {cat} {mood} item{i} s{stars}",
                            "stars": stars,
                            "language": lang,
                            "product_category": cat,
                        }) + "\n")
