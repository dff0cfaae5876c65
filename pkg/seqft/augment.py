"""
Translation augmentation: D_i^T = D_i + T_i.

A fraction of the hop's training set is sampled and translated into every
other language; the translations are appended after the untouched D_i.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from config import DEFAULT_AUGMENT_FRACTION

from .corpus import Example, Translator
from .errors import ConfigError, CorpusError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AugmentConfig:
    fraction: float = DEFAULT_AUGMENT_FRACTION
    seed: int = 0
    stratified: bool = False

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ConfigError(f"must be in [0, 1], got {self.fraction}", key="augment.fraction")


def sample_count(n: int, fraction: float) -> int:
    """round(fraction * n), halves rounded up."""
    return int(math.floor(fraction * n + 0.5))


def _sample_indices(train_set: Sequence[Example], m: int, config: AugmentConfig) -> List[int]:
    rng = np.random.default_rng(config.seed)
    if not config.stratified:
        return sorted(int(i) for i in rng.choice(len(train_set), size=m, replace=False))
    # Stratified: each label contributes in proportion to its share of D_i.
    by_label = {label: [i for i, ex in enumerate(train_set) if ex.label == label] for label in (0, 1)}
    quota0 = min(sample_count(len(by_label[0]), m / len(train_set)), len(by_label[0]))
    quota0 = max(quota0, m - len(by_label[1]))
    picked: List[int] = []
    for label, take in ((0, quota0), (1, m - quota0)):
        members = by_label[label]
        picked.extend(members[int(i)] for i in rng.choice(len(members), size=take, replace=False))
    return sorted(picked)


def augment(train_set: Sequence[Example], lang_set: Sequence[int], hop_lang: int,
            config: AugmentConfig, translator: Translator) -> List[Example]:
    if hop_lang not in lang_set:
        raise CorpusError(f"hop language {hop_lang} is not in the language set {list(lang_set)}")
    foreign = [ex.uid or ex.raw_text[:30] for ex in train_set if ex.lang != hop_lang]
    if foreign:
        raise CorpusError(f"training set for language {hop_lang} contains foreign examples {foreign[:3]}")

    augmented = list(train_set)
    m = sample_count(len(train_set), config.fraction)
    if m == 0:
        return augmented

    targets = [lang for lang in sorted(lang_set) if lang != hop_lang]
    for index in _sample_indices(train_set, m, config):
        for target in targets:
            augmented.append(translator.translate(train_set[index], target))
    logger.debug(f"Augmented {len(train_set)} examples with {m} x {len(targets)} translations")
    return augmented
