"""Tests for synthetic corpora, MARC ingestion, training sets and translators."""

import json
import os
from dataclasses import replace

import pytest

from seqft import corpus as cp
from seqft.corpus import CorpusSpec, Example, HashingTokenizer, OracleTranslator
from seqft.errors import (
    ConfigError,
    CorpusError,
    MarcFormatError,
    PoolExhaustedError,
    PrivacyError,
    TranslationError,
)
from seqft.sequence import Combo

from conftest import TINY_SPEC, write_marc_file


def _write_lines(path, records):
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write((record if isinstance(record, str) else json.dumps(record)) + "\n")


MARC_OK = {"review_body": "fine", "stars": 4, "language": "en", "product_category": "home"}


# =============================================================================
# SYNTHETIC CORPUS
# =============================================================================

def test_generation_is_deterministic(tmp_path):
    first = cp.dump_corpus(cp.gen_synthetic_corpus(TINY_SPEC), str(tmp_path / "a"))
    second = cp.dump_corpus(cp.gen_synthetic_corpus(TINY_SPEC), str(tmp_path / "b"))
    assert [os.path.basename(p) for p in first] == [
        "vocabulary.tsv", "corpus_spec.json", "train_pools.tsv", "test_sets.tsv"]
    for a, b in zip(first, second):
        with open(a, "rb") as fa, open(b, "rb") as fb:
            assert fa.read() == fb.read()


def test_different_seed_gives_different_corpus():
    a = cp.gen_synthetic_corpus(TINY_SPEC)
    b = cp.gen_synthetic_corpus(replace(TINY_SPEC, seed=1))
    assert a.test_suite[Combo(0, 0)] != b.test_suite[Combo(0, 0)]


def test_names_and_sizes(tiny_corpus):
    assert tiny_corpus.lang_names == ("de", "en")
    assert tiny_corpus.category_names == ("apparel", "automotive")
    assert tiny_corpus.vocab_size == 1 + 2 * TINY_SPEC.tokens_per_lang
    for combo in tiny_corpus.test_suite.combos():
        test = tiny_corpus.test_suite[combo]
        assert len(test) == TINY_SPEC.test_size
        assert sum(ex.label for ex in test) == TINY_SPEC.test_size // 2
        assert len(tiny_corpus.pools[combo]) == 2 * TINY_SPEC.pool_per_label


def test_test_sets_disjoint_from_pools(tiny_corpus):
    pooled = {ex.tokens for pool in tiny_corpus.pools.values() for ex in pool}
    pooled_ids = {ex.uid for pool in tiny_corpus.pools.values() for ex in pool}
    for combo in tiny_corpus.test_suite.combos():
        for ex in tiny_corpus.test_suite[combo]:
            assert ex.tokens not in pooled
            assert ex.uid not in pooled_ids


def test_labels_follow_majority_polarity(tiny_corpus):
    vocab = tiny_corpus.tokenizer
    for combo, pool in tiny_corpus.pools.items():
        for ex in pool + tiny_corpus.test_suite[combo]:
            roles = [vocab.role_of(vocab.offset_of(t)) for t in ex.tokens]
            positive, negative = roles.count("positive"), roles.count("negative")
            assert ex.label == (1 if positive > negative else 0)
            assert f"topic_{ex.category}" in roles
            assert all(vocab.lang_of(t) == ex.lang for t in ex.tokens)


def test_label_noise_only_touches_pools():
    noisy = cp.gen_synthetic_corpus(replace(TINY_SPEC, pool_per_label=40, label_noise=0.3))
    vocab = noisy.tokenizer
    flipped = 0
    for combo, pool in noisy.pools.items():
        for ex in pool:
            roles = [vocab.role_of(vocab.offset_of(t)) for t in ex.tokens]
            flipped += int(ex.label != (1 if roles.count("positive") > roles.count("negative") else 0))
        for ex in noisy.test_suite[combo]:
            roles = [vocab.role_of(vocab.offset_of(t)) for t in ex.tokens]
            assert ex.label == (1 if roles.count("positive") > roles.count("negative") else 0)
    assert flipped > 0


@pytest.mark.parametrize("changes", [
    {"test_size": 3},
    {"train_size": 0},
    {"tokens_per_lang": 12},
    {"min_len": 3},
    {"label_noise": 0.5},
    {"num_langs": 0},
])
def test_invalid_spec_rejected(changes):
    with pytest.raises(CorpusError):
        cp.gen_synthetic_corpus(replace(TINY_SPEC, **changes))


def test_pool_smaller_than_training_set_rejected():
    with pytest.raises(PoolExhaustedError):
        replace(TINY_SPEC, pool_per_label=5).validate()


def test_vocabulary_encode_decode(tiny_corpus):
    ex = tiny_corpus.test_suite[Combo(1, 0)][0]
    vocab = tiny_corpus.tokenizer
    assert vocab.encode(vocab.decode(ex.tokens), 1) == ex.tokens
    with pytest.raises(CorpusError):
        vocab.encode(vocab.decode(ex.tokens), 0)


def test_example_requires_tokens_and_binary_label():
    with pytest.raises(CorpusError):
        Example((), "", 0, 0, 0)
    with pytest.raises(CorpusError):
        Example((1,), "a", 2, 0, 0)


def test_example_equality_ignores_provenance():
    a = Example((1, 2), "a b", 1, 0, 0, uid="x")
    b = Example((1, 2), "a b", 1, 0, 0, origin=cp.ORIGIN_TRANSLATED, uid="y")
    assert a == b


# =============================================================================
# TRAINING SETS AND PRIVACY
# =============================================================================

def test_training_set_is_balanced_and_deterministic(tiny_corpus):
    combo = Combo(0, 1)
    a = cp.make_training_set(tiny_corpus, combo, 12, seed=5)
    b = cp.make_training_set(tiny_corpus, combo, 12, seed=5)
    assert a == b
    assert len(a) == 12
    assert sum(ex.label for ex in a) == 6
    assert len({ex.uid for ex in a}) == 12
    assert all(ex.combo == combo for ex in a)
    assert cp.make_training_set(tiny_corpus, combo, 12, seed=6) != a


def test_training_set_size_checks(tiny_corpus):
    with pytest.raises(CorpusError):
        cp.make_training_set(tiny_corpus, Combo(0, 0), 7, seed=0)
    with pytest.raises(PoolExhaustedError) as exc:
        cp.make_training_set(tiny_corpus, Combo(0, 0), 40, seed=0)
    assert exc.value.needed == 20
    assert exc.value.available == TINY_SPEC.pool_per_label


def test_released_pool_cannot_be_sampled_again(tiny_corpus):
    combo = Combo(1, 1)
    cp.make_training_set(tiny_corpus, combo, 12, seed=0)
    tiny_corpus.release(combo)
    assert combo not in tiny_corpus.pools
    with pytest.raises(PrivacyError):
        cp.make_training_set(tiny_corpus, combo, 12, seed=0)
    # test sets survive
    assert len(tiny_corpus.test_suite[combo]) == TINY_SPEC.test_size


# =============================================================================
# MARC INGESTION
# =============================================================================

def test_marc_fixture_bifurcation_and_balancing(fixtures_dir):
    examples = cp.load_marc_jsonl(os.path.join(fixtures_dir, "marc_12.jsonl"))
    line_numbers = [int(ex.uid.rsplit("-", 1)[1]) for ex in examples]
    # 3-star lines (3, 10) dropped; star 1 and 2 cut to 2 each, star 4 and 5 to 1 each
    assert line_numbers == [1, 2, 4, 5, 7, 9]
    assert [ex.label for ex in examples] == [1, 0, 0, 0, 1, 0]
    assert all((ex.lang, ex.category) == (0, 0) for ex in examples)
    assert examples[0].raw_text == "great fit love it"


def test_marc_star_mapping(tmp_path):
    path = str(tmp_path / "m.jsonl")
    _write_lines(path, [dict(MARC_OK, stars=s, review_body=f"review {s}") for s in (1, 2, 3, 4, 5)])
    labels = {ex.raw_text: ex.label for ex in cp.load_marc_jsonl(path)}
    assert labels == {"review 1": 0, "review 2": 0, "review 4": 1, "review 5": 1}


@pytest.mark.parametrize("bad, line_no", [
    ("{not json", 2),
    (json.dumps({k: v for k, v in MARC_OK.items() if k != "stars"}), 2),
    (json.dumps(dict(MARC_OK, stars=6)), 2),
    (json.dumps(dict(MARC_OK, stars=True)), 2),
    (json.dumps(dict(MARC_OK, language="xx")), 2),
    (json.dumps(dict(MARC_OK, product_category="toys")), 2),
    (json.dumps(dict(MARC_OK, review_body="   ")), 2),
])
def test_marc_malformed_lines_rejected(tmp_path, bad, line_no):
    path = str(tmp_path / "m.jsonl")
    _write_lines(path, [MARC_OK, bad])
    with pytest.raises(MarcFormatError) as exc:
        cp.load_marc_jsonl(path)
    assert exc.value.line_no == line_no


def test_marc_missing_file():
    with pytest.raises(FileNotFoundError):
        cp.load_marc_jsonl("/nonexistent/marc.jsonl")


def test_hashing_tokenizer_is_stable_and_in_range():
    tok = HashingTokenizer(64)
    a = tok.encode("hello world hello", 1)
    assert a == tok.encode("hello world hello", 1)
    assert a[0] == a[2]
    assert all(1 <= t <= 64 for t in a)
    assert tok.size == 65


# =============================================================================
# TRANSLATION
# =============================================================================

def test_oracle_translation_is_label_preserving_and_bijective(tiny_corpus):
    oracle = OracleTranslator(tiny_corpus.tokenizer)
    vocab = tiny_corpus.tokenizer
    for ex in tiny_corpus.pools[Combo(0, 1)]:
        out = oracle.translate(ex, 1)
        assert (out.label, out.category, out.lang) == (ex.label, ex.category, 1)
        assert out.origin == cp.ORIGIN_TRANSLATED
        assert [vocab.offset_of(t) for t in out.tokens] == [vocab.offset_of(t) for t in ex.tokens]
        assert oracle.translate(out, 0).tokens == ex.tokens


def test_oracle_same_language_is_identity(tiny_corpus):
    ex = tiny_corpus.pools[Combo(0, 0)][0]
    assert OracleTranslator(tiny_corpus.tokenizer).translate(ex, 0) is ex


def test_oracle_rejects_foreign_tokens(tiny_corpus):
    ex = tiny_corpus.pools[Combo(0, 0)][0]
    mixed = Example(ex.tokens + tiny_corpus.pools[Combo(1, 0)][0].tokens[:1], "x", ex.label, 0, 0)
    with pytest.raises(TranslationError):
        OracleTranslator(tiny_corpus.tokenizer).translate(mixed, 1)


def test_translation_memory(tmp_path):
    path = str(tmp_path / "tm.jsonl")
    _write_lines(path, [{"lang_from": "de", "lang_to": "en", "source_text": "gut", "target_text": "good"}])
    tok = HashingTokenizer(32)
    tm = cp.TranslationMemoryTranslator(path, ("de", "en"), tok)
    src = Example(tok.encode("gut", 0), "gut", 1, 0, 3, uid="r1")
    out = cp.translate(src, 1, tm)
    assert (out.raw_text, out.lang, out.label, out.category) == ("good", 1, 1, 3)
    assert out.tokens == tok.encode("good", 1)
    with pytest.raises(TranslationError):
        tm.translate(Example(tok.encode("schlecht", 0), "schlecht", 0, 0, 3), 1)


def test_translation_memory_malformed(tmp_path):
    path = str(tmp_path / "tm.jsonl")
    _write_lines(path, ['{"lang_from": "de"}'])
    with pytest.raises(CorpusError):
        cp.TranslationMemoryTranslator(path, ("de", "en"), HashingTokenizer(8))


# =============================================================================
# BASELINE
# =============================================================================

def test_bag_of_tokens_learns_synthetic_sentiment_on_every_combo():
    corpus = cp.gen_synthetic_corpus(CorpusSpec(num_langs=2, num_categories=10, seed=3))
    scores = {combo: cp.bag_of_tokens_f1(corpus.pools[combo], corpus.test_suite[combo])
              for combo in corpus.test_suite.combos()}
    assert len(scores) == 20
    assert min(scores.values()) >= 0.9, scores


def test_sentiment_majority_has_a_clear_margin(tiny_corpus):
    vocab = tiny_corpus.tokenizer
    for combo, pool in tiny_corpus.pools.items():
        for ex in pool + tiny_corpus.test_suite[combo]:
            roles = [vocab.role_of(vocab.offset_of(t)) for t in ex.tokens]
            positive, negative = roles.count("positive"), roles.count("negative")
            assert positive + negative == cp.SENTIMENT_TOKENS_PER_EXAMPLE
            assert abs(positive - negative) >= 2


def test_marc_corpus_pools_and_balanced_test_sets(tmp_path):
    train, test = str(tmp_path / "train.jsonl"), str(tmp_path / "test.jsonl")
    write_marc_file(train, per_star=2)
    write_marc_file(test, per_star=3, tag="t-")
    corpus = cp.build_marc_corpus(train, test, test_size=4, num_buckets=64)
    assert len(corpus.lang_names) == 6 and len(corpus.category_names) == 10
    assert corpus.vocab_size == 65
    assert len(corpus.pools[Combo(2, 7)]) == 8
    for combo in corpus.test_suite.combos():
        assert [ex.label for ex in corpus.test_suite[combo]] == [0, 1, 0, 1]


def test_marc_corpus_with_too_few_test_reviews(tmp_path):
    train, test = str(tmp_path / "train.jsonl"), str(tmp_path / "test.jsonl")
    write_marc_file(train, per_star=2)
    write_marc_file(test, per_star=1)
    with pytest.raises(PoolExhaustedError):
        cp.build_marc_corpus(train, test, test_size=6)


def _keep_marc_lines(path, langs, cats):
    with open(path) as f:
        lines = [line for line in f if json.loads(line)["language"] in langs
                 and json.loads(line)["product_category"] in cats]
    with open(path, "w") as f:
        f.writelines(lines)


def test_marc_corpus_uses_the_configured_names(tmp_path):
    train, test = str(tmp_path / "train.jsonl"), str(tmp_path / "test.jsonl")
    write_marc_file(train, per_star=2)
    write_marc_file(test, per_star=3, tag="t-")
    for path in (train, test):
        _keep_marc_lines(path, ("de", "en"), ("apparel", "automotive", "beauty"))
    corpus = cp.build_marc_corpus(train, test, test_size=4, num_buckets=64, lang_names=("de", "en"),
                                  category_names=("apparel", "automotive", "beauty"))
    assert corpus.lang_names == ("de", "en")
    assert corpus.category_names == ("apparel", "automotive", "beauty")
    assert set(corpus.test_suite.combos()) == {Combo(lang, cat) for lang in range(2) for cat in range(3)}


def test_marc_review_outside_the_configured_names_rejected(tmp_path):
    train, test = str(tmp_path / "train.jsonl"), str(tmp_path / "test.jsonl")
    write_marc_file(train, per_star=2)
    write_marc_file(test, per_star=3, tag="t-")
    with pytest.raises(MarcFormatError):
        cp.build_marc_corpus(train, test, test_size=4, lang_names=("de", "en"))
    with pytest.raises(ConfigError):
        cp.build_marc_corpus(train, test, test_size=4, lang_names=("de", "de"))
