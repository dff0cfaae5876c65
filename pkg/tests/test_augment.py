"""Tests for translation augmentation of a hop's training set."""

from collections import Counter

import pytest

from seqft import corpus as cp
from seqft.augment import AugmentConfig, augment, sample_count
from seqft.corpus import CorpusSpec, OracleTranslator
from seqft.errors import ConfigError, CorpusError
from seqft.sequence import Combo


@pytest.fixture(scope="module")
def six_language_corpus():
    return cp.gen_synthetic_corpus(CorpusSpec(num_langs=6, num_categories=1, seed=2))


@pytest.fixture(scope="module")
def german_hop(six_language_corpus):
    return cp.make_training_set(six_language_corpus, Combo(0, 0), 100, seed=4)


def test_sample_count_rounds_halves_up():
    assert sample_count(100, 0.1) == 10
    assert sample_count(3, 0.5) == 2
    assert sample_count(10, 0.0) == 0
    assert sample_count(7, 1.0) == 7


def test_one_hundred_examples_become_one_hundred_fifty(six_language_corpus, german_hop):
    oracle = OracleTranslator(six_language_corpus.tokenizer)
    out = augment(german_hop, six_language_corpus.languages, 0, AugmentConfig(0.1, seed=9), oracle)

    assert len(out) == 150
    assert out[:100] == german_hop
    translated = out[100:]
    assert all(ex.origin == cp.ORIGIN_TRANSLATED for ex in translated)
    assert Counter(ex.lang for ex in translated) == {lang: 10 for lang in range(1, 6)}
    assert all(ex.category == 0 for ex in translated)

    # every translation comes from one of ten sampled sources and keeps its label
    sources = {ex.uid.split(">")[0] for ex in translated}
    assert len(sources) == 10
    by_uid = {ex.uid: ex for ex in german_hop}
    for ex in translated:
        assert ex.label == by_uid[ex.uid.split(">")[0]].label


def test_zero_fraction_is_identity(six_language_corpus, german_hop):
    oracle = OracleTranslator(six_language_corpus.tokenizer)
    out = augment(german_hop, six_language_corpus.languages, 0, AugmentConfig(0.0), oracle)
    assert out == german_hop
    assert out is not german_hop


def test_single_language_adds_nothing(german_hop, six_language_corpus):
    oracle = OracleTranslator(six_language_corpus.tokenizer)
    assert augment(german_hop, [0], 0, AugmentConfig(0.5), oracle) == german_hop


def test_augmentation_is_seeded(six_language_corpus, german_hop):
    oracle = OracleTranslator(six_language_corpus.tokenizer)
    langs = six_language_corpus.languages
    a = augment(german_hop, langs, 0, AugmentConfig(0.1, seed=1), oracle)
    b = augment(german_hop, langs, 0, AugmentConfig(0.1, seed=1), oracle)
    c = augment(german_hop, langs, 0, AugmentConfig(0.1, seed=2), oracle)
    assert a == b
    assert a != c


def test_stratified_sampling_keeps_label_shares(six_language_corpus, german_hop):
    oracle = OracleTranslator(six_language_corpus.tokenizer)
    out = augment(german_hop, six_language_corpus.languages, 0,
                  AugmentConfig(0.1, seed=3, stratified=True), oracle)
    for lang in range(1, 6):
        labels = [ex.label for ex in out[100:] if ex.lang == lang]
        assert sorted(labels) == [0] * 5 + [1] * 5


def test_foreign_examples_rejected(six_language_corpus, german_hop):
    oracle = OracleTranslator(six_language_corpus.tokenizer)
    with pytest.raises(CorpusError):
        augment(german_hop, six_language_corpus.languages, 1, AugmentConfig(0.1), oracle)


def test_hop_language_must_be_in_language_set(six_language_corpus, german_hop):
    oracle = OracleTranslator(six_language_corpus.tokenizer)
    with pytest.raises(CorpusError):
        augment(german_hop, [1, 2], 0, AugmentConfig(0.1), oracle)


@pytest.mark.parametrize("fraction", [-0.1, 1.5])
def test_fraction_outside_unit_interval_rejected(fraction):
    with pytest.raises(ConfigError) as exc:
        AugmentConfig(fraction)
    assert exc.value.key == "augment.fraction"
