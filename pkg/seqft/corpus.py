"""
Multilingual sentiment data: synthetic generation, MARC ingestion,
tokenization, class-balanced training sets and translators.

Synthetic languages have disjoint token-id blocks with identical internal
layout, so the token at offset k of one language translates to the token at
offset k of any other. Each block is laid out as

    [positive sentiment | negative sentiment | topic words per category | filler]

An example's label is the majority polarity of its sentiment tokens and it
always carries at least one topic token of its category.
"""

import json
import logging
import os
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, List, Optional, Protocol, Sequence, Set, Tuple

import numpy as np
import pandas as pd
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.linear_model import LogisticRegression
from sklearn.utils import murmurhash3_32

from config import (
    CATEGORY_NAMES,
    DEFAULT_HASH_BUCKETS,
    DEFAULT_MAX_LEN,
    DEFAULT_MIN_LEN,
    DEFAULT_NUM_CATEGORIES,
    DEFAULT_NUM_LANGS,
    DEFAULT_POOL_PER_LABEL,
    DEFAULT_SENTIMENT_TOKENS,
    DEFAULT_TEST_SIZE,
    DEFAULT_TOKENS_PER_LANG,
    DEFAULT_TOPIC_TOKENS,
    DEFAULT_TRAIN_SIZE,
    LANGUAGE_NAMES,
    PAD_ID,
)

from .errors import (
    ConfigError,
    CorpusError,
    MarcFormatError,
    PoolExhaustedError,
    PrivacyError,
    TranslationError,
)
from .metrics import f1_binary_macro
from .sequence import Combo

logger = logging.getLogger(__name__)

ORIGIN_NATURAL = "natural"
ORIGIN_TRANSLATED = "translated"

NEGATIVE, POSITIVE = 0, 1
MARC_FIELDS = ("review_body", "stars", "language", "product_category")
STAR_GROUPS = {NEGATIVE: (1, 2), POSITIVE: (4, 5)}

_CONSONANTS = "bcdfghjklmnprstvwz"
_VOWELS = "aeiou"
SENTIMENT_TOKENS_PER_EXAMPLE = 4


@dataclass(frozen=True)
class Example:
    """One review. Equality compares content, not provenance."""
    tokens: Tuple[int, ...]
    raw_text: str
    label: int
    lang: int
    category: int
    origin: str = field(default=ORIGIN_NATURAL, compare=False)
    uid: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.tokens:
            raise CorpusError(f"example {self.uid or self.raw_text[:30]!r} has no tokens")
        if self.label not in (NEGATIVE, POSITIVE):
            raise CorpusError(f"label must be 0 or 1, got {self.label!r}")

    @property
    def combo(self) -> Combo:
        return Combo(self.lang, self.category)


# =============================================================================
# SPECS AND VOCABULARIES
# =============================================================================

@dataclass(frozen=True)
class CorpusSpec:
    num_langs: int = DEFAULT_NUM_LANGS
    num_categories: int = DEFAULT_NUM_CATEGORIES
    tokens_per_lang: int = DEFAULT_TOKENS_PER_LANG
    sentiment_tokens: int = DEFAULT_SENTIMENT_TOKENS
    topic_tokens: int = DEFAULT_TOPIC_TOKENS
    min_len: int = DEFAULT_MIN_LEN
    max_len: int = DEFAULT_MAX_LEN
    pool_per_label: int = DEFAULT_POOL_PER_LABEL
    train_size: int = DEFAULT_TRAIN_SIZE
    test_size: int = DEFAULT_TEST_SIZE
    label_noise: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.num_langs < 1 or self.num_categories < 1:
            raise CorpusError("need at least one language and one category")
        structured = 2 * self.sentiment_tokens + self.num_categories * self.topic_tokens
        if self.sentiment_tokens < 1 or self.topic_tokens < 1:
            raise CorpusError("sentiment_tokens and topic_tokens must be positive")
        if structured >= self.tokens_per_lang:
            raise CorpusError(
                f"tokens_per_lang={self.tokens_per_lang} leaves no filler tokens "
                f"after {structured} sentiment/topic tokens"
            )
        # sentiment tokens + up to two topic tokens must fit
        if self.min_len < SENTIMENT_TOKENS_PER_EXAMPLE + 2 or self.max_len < self.min_len:
            raise CorpusError(f"invalid length range [{self.min_len}, {self.max_len}]")
        if self.test_size < 2 or self.test_size % 2:
            raise CorpusError(f"test_size must be even and positive, got {self.test_size}")
        if self.train_size < 2 or self.train_size % 2:
            raise CorpusError(f"train_size must be even and positive, got {self.train_size}")
        if self.pool_per_label < self.train_size // 2:
            raise PoolExhaustedError("every combo", POSITIVE, self.train_size // 2, self.pool_per_label)
        if not 0.0 <= self.label_noise < 0.5:
            raise CorpusError(f"label_noise must be in [0, 0.5), got {self.label_noise}")


def default_names(count: int, known: Sequence[str], prefix: str) -> Tuple[str, ...]:
    if count <= len(known):
        return tuple(known[:count])
    return tuple(known) + tuple(f"{prefix}{i}" for i in range(len(known), count))


class Vocabulary:
    """Closed vocabulary of the synthetic languages (id 0 is padding)."""

    def __init__(self, spec: CorpusSpec, words_by_lang: List[List[str]]):
        self.spec = spec
        self.words = ["<pad>"]
        for words in words_by_lang:
            self.words.extend(words)
        self.word_to_id = {w: i for i, w in enumerate(self.words) if i != PAD_ID}

    @property
    def size(self) -> int:
        return len(self.words)

    def token_id(self, lang: int, offset: int) -> int:
        return 1 + lang * self.spec.tokens_per_lang + offset

    def lang_of(self, token: int) -> int:
        return (token - 1) // self.spec.tokens_per_lang

    def offset_of(self, token: int) -> int:
        return (token - 1) % self.spec.tokens_per_lang

    def role_of(self, offset: int) -> str:
        s, t = self.spec.sentiment_tokens, self.spec.topic_tokens
        if offset < s:
            return "positive"
        if offset < 2 * s:
            return "negative"
        if offset < 2 * s + self.spec.num_categories * t:
            return f"topic_{(offset - 2 * s) // t}"
        return "filler"

    def polarity_offsets(self, label: int) -> range:
        s = self.spec.sentiment_tokens
        return range(0, s) if label == POSITIVE else range(s, 2 * s)

    def topic_offsets(self, category: int) -> range:
        start = 2 * self.spec.sentiment_tokens + category * self.spec.topic_tokens
        return range(start, start + self.spec.topic_tokens)

    def filler_offsets(self) -> range:
        return range(2 * self.spec.sentiment_tokens + self.spec.num_categories * self.spec.topic_tokens,
                     self.spec.tokens_per_lang)

    def decode(self, tokens: Iterable[int]) -> str:
        return " ".join(self.words[t] for t in tokens)

    def encode(self, text: str, lang: int) -> Tuple[int, ...]:
        tokens = []
        for word in text.split():
            token = self.word_to_id.get(word)
            if token is None or self.lang_of(token) != lang:
                raise CorpusError(f"word {word!r} is not in the vocabulary of language {lang}")
            tokens.append(token)
        return tuple(tokens)


class HashingTokenizer:
    """Whitespace tokenizer hashing (language, word) into a fixed bucket range."""

    def __init__(self, num_buckets: int = DEFAULT_HASH_BUCKETS):
        if num_buckets < 1:
            raise CorpusError("hash bucket count must be positive")
        self.num_buckets = num_buckets

    @property
    def size(self) -> int:
        return self.num_buckets + 1

    def encode(self, text: str, lang: int) -> Tuple[int, ...]:
        return tuple(
            1 + murmurhash3_32(f"{lang}:{word}", positive=True) % self.num_buckets
            for word in text.split()
        )


# =============================================================================
# CORPUS
# =============================================================================

@dataclass
class TestSuite:
    """Held-out balanced test sets for every (language, category) combo."""
    sets: Dict[Combo, List[Example]]

    def combos(self) -> List[Combo]:
        return sorted(self.sets)

    def __getitem__(self, combo: Combo) -> List[Example]:
        return self.sets[combo]


@dataclass
class Corpus:
    lang_names: Tuple[str, ...]
    category_names: Tuple[str, ...]
    tokenizer: object  # Vocabulary or HashingTokenizer
    pools: Dict[Combo, List[Example]]
    test_suite: TestSuite
    released: Set[Combo] = field(default_factory=set)

    @property
    def languages(self) -> List[int]:
        return list(range(len(self.lang_names)))

    @property
    def categories(self) -> List[int]:
        return list(range(len(self.category_names)))

    @property
    def vocab_size(self) -> int:
        return self.tokenizer.size

    def combo_name(self, combo: Combo) -> str:
        return f"{self.lang_names[combo.lang]}-{self.category_names[combo.category]}"

    def release(self, combo: Combo) -> None:
        """Drop a combo's training pool; it can never be sampled again."""
        self.pools.pop(combo, None)
        self.released.add(combo)


def _make_words(rng: np.random.Generator, count: int, taken: Set[str]) -> List[str]:
    consonants = list(rng.choice(list(_CONSONANTS), size=10, replace=False))
    vowels = list(_VOWELS)
    words = []
    while len(words) < count:
        syllables = int(rng.integers(2, 4))
        word = "".join(str(rng.choice(consonants)) + str(rng.choice(vowels)) for _ in range(syllables))
        if word not in taken:
            taken.add(word)
            words.append(word)
    return words


def _synth_tokens(rng: np.random.Generator, vocab: Vocabulary, spec: CorpusSpec,
                  lang: int, category: int, label: int) -> Tuple[int, ...]:
    length = int(rng.integers(spec.min_len, spec.max_len + 1))
    n_major = int(rng.integers(SENTIMENT_TOKENS_PER_EXAMPLE // 2 + 1, SENTIMENT_TOKENS_PER_EXAMPLE + 1))
    n_minor = SENTIMENT_TOKENS_PER_EXAMPLE - n_major
    n_topic = int(rng.integers(1, 3))
    offsets = (
        list(rng.choice(vocab.polarity_offsets(label), size=n_major))
        + list(rng.choice(vocab.polarity_offsets(1 - label), size=n_minor))
        + list(rng.choice(vocab.topic_offsets(category), size=n_topic))
    )
    offsets += list(rng.choice(vocab.filler_offsets(), size=length - len(offsets)))
    order = rng.permutation(len(offsets))
    return tuple(vocab.token_id(lang, int(offsets[i])) for i in order)


def gen_synthetic_corpus(spec: CorpusSpec) -> Corpus:
    """Deterministic synthetic corpus: vocabulary, training pools and test suite."""
    spec.validate()
    lang_names = default_names(spec.num_langs, LANGUAGE_NAMES, "lang")
    category_names = default_names(spec.num_categories, CATEGORY_NAMES, "cat")

    vocab_rng = np.random.default_rng([spec.seed, 0])
    taken: Set[str] = set()
    vocab = Vocabulary(spec, [_make_words(vocab_rng, spec.tokens_per_lang, taken)
                              for _ in range(spec.num_langs)])

    rng = np.random.default_rng([spec.seed, 1])
    pools: Dict[Combo, List[Example]] = {}
    tests: Dict[Combo, List[Example]] = {}
    for lang in range(spec.num_langs):
        for cat in range(spec.num_categories):
            combo = Combo(lang, cat)
            seen: Set[Tuple[int, ...]] = set()

            def draw(label):
                # Rejecting duplicates keeps test sets disjoint from pools by content too.
                while True:
                    tokens = _synth_tokens(rng, vocab, spec, lang, cat, label)
                    if tokens not in seen:
                        seen.add(tokens)
                        return tokens

            test = []
            for i in range(spec.test_size):
                label = i % 2
                tokens = draw(label)
                test.append(Example(tokens, vocab.decode(tokens), label, lang, cat,
                                    uid=f"test-{lang}-{cat}-{i}"))
            pool = []
            for i in range(2 * spec.pool_per_label):
                label = i % 2
                tokens = draw(label)
                stored = label
                if spec.label_noise and rng.random() < spec.label_noise:
                    stored = 1 - label
                pool.append(Example(tokens, vocab.decode(tokens), stored, lang, cat,
                                    uid=f"pool-{lang}-{cat}-{i}"))
            tests[combo] = test
            pools[combo] = pool
    logger.info(f"Generated synthetic corpus: {spec.num_langs} languages x "
                f"{spec.num_categories} categories, vocabulary {vocab.size}")
    return Corpus(lang_names, category_names, vocab, pools, TestSuite(tests))


def make_training_set(corpus: Corpus, combo: Combo, size: int, seed: int) -> List[Example]:
    """Class-balanced sample of `size` examples drawn without replacement."""
    if size < 2 or size % 2:
        raise CorpusError(f"training set size must be even and positive, got {size}")
    if combo in corpus.released:
        raise PrivacyError(corpus.combo_name(combo))
    if combo not in corpus.pools:
        raise CorpusError(f"no training pool for {combo}")
    pool = corpus.pools[combo]
    rng = np.random.default_rng(seed)
    half = size // 2
    chosen = []
    for label in (NEGATIVE, POSITIVE):
        candidates = [ex for ex in pool if ex.label == label]
        if len(candidates) < half:
            raise PoolExhaustedError(corpus.combo_name(combo), label, half, len(candidates))
        picks = rng.choice(len(candidates), size=half, replace=False)
        chosen.extend(candidates[int(i)] for i in picks)
    order = rng.permutation(len(chosen))
    return [chosen[int(i)] for i in order]


# =============================================================================
# MARC INGESTION
# =============================================================================

def _parse_marc_line(line: str, line_no: int, lang_ids: Dict[str, int],
                     cat_ids: Dict[str, int]) -> dict:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as e:
        raise MarcFormatError(f"invalid JSON ({e.msg})", line_no) from e
    if not isinstance(record, dict):
        raise MarcFormatError("record is not an object", line_no)
    missing = [f for f in MARC_FIELDS if f not in record]
    if missing:
        raise MarcFormatError(f"missing fields {missing}", line_no)
    stars = record["stars"]
    if isinstance(stars, bool) or not isinstance(stars, int) or not 1 <= stars <= 5:
        raise MarcFormatError(f"stars must be an integer 1-5, got {stars!r}", line_no)
    if not isinstance(record["review_body"], str) or not record["review_body"].split():
        raise MarcFormatError("review_body must be a non-empty string", line_no)
    if record["language"] not in lang_ids:
        raise MarcFormatError(f"unknown language {record['language']!r}", line_no)
    if record["product_category"] not in cat_ids:
        raise MarcFormatError(f"unknown product_category {record['product_category']!r}", line_no)
    return {
        "line_no": line_no,
        "review_body": record["review_body"],
        "stars": stars,
        "lang": lang_ids[record["language"]],
        "category": cat_ids[record["product_category"]],
    }


def load_marc_jsonl(path: str, lang_names: Sequence[str] = LANGUAGE_NAMES,
                    category_names: Sequence[str] = CATEGORY_NAMES,
                    tokenizer: Optional[HashingTokenizer] = None) -> List[Example]:
    """
    Read MARC-format reviews and bifurcate them into binary sentiment.

    3-star reviews are dropped, {1,2} -> 0 and {4,5} -> 1. Within every
    (language, category, label) group the constituent star ratings are cut to
    the same count, keeping the earliest lines.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"MARC file not found: {path}")
    tokenizer = tokenizer or HashingTokenizer()
    lang_ids = {name: i for i, name in enumerate(lang_names)}
    cat_ids = {name: i for i, name in enumerate(category_names)}

    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, line in enumerate(f, 1):
            if line.strip():
                rows.append(_parse_marc_line(line, line_no, lang_ids, cat_ids))
    if not rows:
        return []

    df = pd.DataFrame(rows)
    df = df[df["stars"] != 3].copy()
    if df.empty:
        return []
    df["label"] = (df["stars"] >= 4).astype(int)

    keys = ["lang", "category", "label"]
    per_star = df.groupby(keys + ["stars"]).size().unstack(fill_value=0).reindex(
        columns=[1, 2, 4, 5], fill_value=0)
    quota = pd.Series(
        [min(row[s] for s in STAR_GROUPS[idx[2]]) for idx, row in per_star.iterrows()],
        index=per_star.index,
    )
    df["rank"] = df.groupby(keys + ["stars"]).cumcount()
    df = df.join(quota.rename("quota"), on=keys)
    kept = df[df["rank"] < df["quota"]]
    logger.info(f"Loaded {len(kept)} of {len(rows)} MARC records from {path}")

    return [
        Example(tokenizer.encode(r.review_body, r.lang), r.review_body, int(r.label),
                int(r.lang), int(r.category), uid=f"marc-{os.path.basename(path)}-{r.line_no}")
        for r in kept.itertuples(index=False)
    ]


def build_marc_corpus(train_path: str, test_path: str, test_size: int,
                      num_buckets: int = DEFAULT_HASH_BUCKETS,
                      lang_names: Sequence[str] = LANGUAGE_NAMES,
                      category_names: Sequence[str] = CATEGORY_NAMES) -> Corpus:
    """
    Training pools from one MARC file, balanced test sets from another.

    Both files may only use the given language and category names; every
    (language, category) pair of them needs a full test set.
    """
    lang_names, category_names = tuple(lang_names), tuple(category_names)
    for key, names in (("corpus.num_langs", lang_names), ("corpus.num_categories", category_names)):
        if not names or len(set(names)) != len(names):
            raise ConfigError(f"names must be non-empty and distinct, got {list(names)}", key=key)
    tokenizer = HashingTokenizer(num_buckets)
    train = load_marc_jsonl(train_path, lang_names, category_names, tokenizer)
    test = load_marc_jsonl(test_path, lang_names, category_names, tokenizer)
    pools: Dict[Combo, List[Example]] = {}
    for ex in train:
        pools.setdefault(ex.combo, []).append(ex)
    tests: Dict[Combo, List[Example]] = {}
    for lang in range(len(lang_names)):
        for cat in range(len(category_names)):
            combo = Combo(lang, cat)
            by_label = []
            for label in (NEGATIVE, POSITIVE):
                members = [ex for ex in test if ex.combo == combo and ex.label == label]
                if len(members) < test_size // 2:
                    raise PoolExhaustedError(f"test set {combo}", label, test_size // 2, len(members))
                by_label.append(members[: test_size // 2])
            tests[combo] = [ex for pair in zip(*by_label) for ex in pair]
    return Corpus(lang_names, category_names, tokenizer, pools, TestSuite(tests))


# =============================================================================
# TRANSLATION
# =============================================================================

class Translator(Protocol):
    def translate(self, example: Example, target_lang: int) -> Example:
        ...


class OracleTranslator:
    """Position-wise bijection between the synthetic vocabularies."""

    def __init__(self, vocab: Vocabulary):
        self.vocab = vocab

    def translate(self, example: Example, target_lang: int) -> Example:
        if target_lang == example.lang:
            return example
        if not 0 <= target_lang < self.vocab.spec.num_langs:
            raise TranslationError(None, str(example.lang), str(target_lang))
        tokens = []
        for token in example.tokens:
            if token == PAD_ID or self.vocab.lang_of(token) != example.lang:
                raise TranslationError(token, str(example.lang), str(target_lang))
            tokens.append(self.vocab.token_id(target_lang, self.vocab.offset_of(token)))
        return Example(tuple(tokens), self.vocab.decode(tokens), example.label, target_lang,
                       example.category, ORIGIN_TRANSLATED, f"{example.uid}>{target_lang}")


class TranslationMemoryTranslator:
    """
    Precomputed translations read from a JSONL file of records
    {"lang_from", "lang_to", "source_text", "target_text"} (language names).
    """

    def __init__(self, path: str, lang_names: Sequence[str], tokenizer):
        if not os.path.exists(path):
            raise FileNotFoundError(f"Translation memory not found: {path}")
        self.lang_names = tuple(lang_names)
        self.tokenizer = tokenizer
        self.memory: Dict[Tuple[str, str, str], str] = {}
        with open(path, "r", encoding="utf-8") as f:
            for line_no, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    rec = json.loads(line)
                    key = (rec["lang_from"], rec["lang_to"], rec["source_text"])
                    self.memory[key] = rec["target_text"]
                except (json.JSONDecodeError, KeyError, TypeError) as e:
                    raise CorpusError(f"{path}:{line_no}: malformed translation record ({e})") from e
        logger.info(f"Loaded {len(self.memory)} translations from {path}")

    def translate(self, example: Example, target_lang: int) -> Example:
        if target_lang == example.lang:
            return example
        source, target = self.lang_names[example.lang], self.lang_names[target_lang]
        text = self.memory.get((source, target, example.raw_text))
        if text is None:
            raise TranslationError(example.raw_text, source, target)
        return Example(self.tokenizer.encode(text, target_lang), text, example.label, target_lang,
                       example.category, ORIGIN_TRANSLATED, f"{example.uid}>{target_lang}")


def translate(example: Example, target_lang: int, translator: Translator) -> Example:
    return translator.translate(example, target_lang)


# =============================================================================
# INSPECTION AND BASELINES
# =============================================================================

def dump_corpus(corpus: Corpus, out_dir: str) -> List[str]:
    """Deterministic TSV dump of vocabulary, training pools and test sets."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    if isinstance(corpus.tokenizer, Vocabulary):
        vocab = corpus.tokenizer
        rows = [
            {"token_id": t, "lang": corpus.lang_names[vocab.lang_of(t)],
             "offset": vocab.offset_of(t), "role": vocab.role_of(vocab.offset_of(t)),
             "word": vocab.words[t]}
            for t in range(1, vocab.size)
        ]
        path = os.path.join(out_dir, "vocabulary.tsv")
        pd.DataFrame(rows).to_csv(path, sep="\t", index=False, lineterminator="\n")
        written.append(path)
        spec_path = os.path.join(out_dir, "corpus_spec.json")
        with open(spec_path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(asdict(vocab.spec), f, indent=2, sort_keys=True)
            f.write("\n")
        written.append(spec_path)

    def frame(sets: Dict[Combo, List[Example]]) -> pd.DataFrame:
        return pd.DataFrame([
            {"uid": ex.uid, "lang": corpus.lang_names[ex.lang],
             "category": corpus.category_names[ex.category], "label": ex.label,
             "text": ex.raw_text}
            for combo in sorted(sets) for ex in sets[combo]
        ])

    for name, sets in (("train_pools.tsv", corpus.pools), ("test_sets.tsv", corpus.test_suite.sets)):
        path = os.path.join(out_dir, name)
        frame(sets).to_csv(path, sep="\t", index=False, lineterminator="\n")
        written.append(path)
    return written


def bag_of_tokens_f1(train: Sequence[Example], test: Sequence[Example]) -> float:
    """Macro F1 of a count-vector logistic regression; a learnability floor."""
    vectorizer = CountVectorizer(token_pattern=r"\S+", lowercase=False)
    x_train = vectorizer.fit_transform([ex.raw_text for ex in train])
    clf = LogisticRegression(max_iter=1000)
    clf.fit(x_train, [ex.label for ex in train])
    preds = clf.predict(vectorizer.transform([ex.raw_text for ex in test]))
    return f1_binary_macro([int(p) for p in preds], [ex.label for ex in test])
