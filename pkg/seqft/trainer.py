"""
Trainer - Sequential fine-tuning across hops.

This module contains the training loop:
- run_hop: fine-tune one model version on one hop's training set
- evaluate: F1 of a model on every test set of the suite
- _run_sequence_core: the single source of truth generator over hops
- run_sequence / iter_sequence: collecting and streaming wrappers

Each hop builds its training set, optionally augments it with translations,
trains with the hop's LLRD schedule, keeps the best-validation epoch and
carries that snapshot into the next hop.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Iterator, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from config import (
    DEFAULT_BASE_LR,
    DEFAULT_BATCH_SIZE,
    DEFAULT_COLLAPSE_THRESHOLD,
    DEFAULT_EPOCHS,
    DEFAULT_EVAL_WORKERS,
    DEFAULT_TRAIN_SIZE,
    DEFAULT_VALIDATION_FRACTION,
    DEFAULT_WEIGHT_DECAY,
    DEFAULT_ZETA,
    METHOD_SEQFT,
    METHOD_SEQFT_LLRD,
    METHOD_SEQFT_TRANS,
    METHOD_SEQFT_TRANS_LLRD,
    OPTIMIZER_ADAMW,
    OPTIMIZERS,
    STREAM_AUGMENT,
    STREAM_SAMPLE,
    STREAM_TRAIN,
)

from . import model as mdl
from . import optim
from .augment import AugmentConfig, augment, sample_count
from .corpus import Corpus, Example, Translator, make_training_set
from .errors import ConfigError, SequenceError, TrainingError
from .metrics import f1_binary_macro
from .model import ModelParams
from .numerics import GradTape
from .sequence import Combo, HopSequence
from .state import HopRecord, HopResult

logger = logging.getLogger(__name__)


class Method(str, Enum):
    SEQFT = METHOD_SEQFT
    SEQFT_LLRD = METHOD_SEQFT_LLRD
    SEQFT_TRANS = METHOD_SEQFT_TRANS
    SEQFT_TRANS_LLRD = METHOD_SEQFT_TRANS_LLRD

    @classmethod
    def parse(cls, name: str) -> "Method":
        try:
            return cls(name)
        except ValueError:
            raise ConfigError(
                f"unknown method {name!r} (expected one of {', '.join(m.value for m in cls)})",
                key="method",
            ) from None

    @property
    def uses_translation(self) -> bool:
        return self in (Method.SEQFT_TRANS, Method.SEQFT_TRANS_LLRD)

    @property
    def uses_llrd(self) -> bool:
        return self in (Method.SEQFT_LLRD, Method.SEQFT_TRANS_LLRD)

    def effective_zeta(self, configured: float) -> float:
        """Non-LLRD methods always train every layer at the base rate."""
        return configured if self.uses_llrd else 1.0


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = DEFAULT_EPOCHS
    base_lr: float = DEFAULT_BASE_LR
    zeta: float = DEFAULT_ZETA
    batch_size: int = DEFAULT_BATCH_SIZE
    validation_fraction: float = DEFAULT_VALIDATION_FRACTION
    optimizer: str = OPTIMIZER_ADAMW
    weight_decay: float = DEFAULT_WEIGHT_DECAY
    train_size: int = DEFAULT_TRAIN_SIZE
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"need at least one epoch, got {self.epochs}", key="train.epochs")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError(f"must be in (0, 1), got {self.validation_fraction}",
                              key="train.validation_fraction")
        if self.batch_size < 1:
            raise ConfigError(f"must be positive, got {self.batch_size}", key="train.batch_size")
        if self.base_lr < 0:
            raise ConfigError(f"must be non-negative, got {self.base_lr}", key="train.base_lr")
        if not 0.0 < self.zeta <= 1.0:
            raise ConfigError(f"must be in (0, 1], got {self.zeta}", key="train.zeta")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigError(f"unknown optimizer {self.optimizer!r}", key="train.optimizer")
        if self.weight_decay < 0:
            raise ConfigError(f"must be non-negative, got {self.weight_decay}", key="train.weight_decay")
        if self.train_size < 2 or self.train_size % 2:
            raise ConfigError(f"must be even and at least 2, got {self.train_size}", key="data.train_size")


def hop_seed(run_seed: int, hop_index: int, stream: int) -> int:
    """Seed for one random stream of one hop, mixed from (run seed, hop, stream)."""
    return int(np.random.SeedSequence([run_seed, hop_index, stream]).generate_state(1)[0])


# =============================================================================
# ONE HOP
# =============================================================================

def split_validation(examples: Sequence[Example], fraction: float, seed: int,
                     hop: int = 0) -> Tuple[List[Example], List[Example]]:
    """Stratified (train, validation) split; both keep the input order."""
    rng = np.random.default_rng([seed, 0])
    held_out = set()
    for label in (0, 1):
        members = [i for i, ex in enumerate(examples) if ex.label == label]
        if not members:
            continue
        take = min(max(sample_count(len(members), fraction), 1), len(members))
        if take == len(members) and len(members) > 1:
            take -= 1
        held_out.update(members[int(i)] for i in rng.permutation(len(members))[:take])

    train = [ex for i, ex in enumerate(examples) if i not in held_out]
    validation = [ex for i, ex in enumerate(examples) if i in held_out]
    if len({ex.label for ex in validation}) < 2:
        raise TrainingError("validation split holds a single label", hop)
    if not train:
        raise TrainingError("validation split leaves no training examples", hop)
    return train, validation


def run_hop(model_in: ModelParams, train_set: Sequence[Example], config: TrainConfig,
            hop: int = 1, method: str = METHOD_SEQFT,
            combo: Optional[Combo] = None) -> Tuple[ModelParams, HopRecord]:
    """
    Fine-tune a copy of model_in for config.epochs epochs.

    Returns the parameters of the epoch with the highest validation macro F1
    (earliest epoch on ties); model_in itself is left untouched.
    """
    if not train_set:
        raise TrainingError("empty training set", hop)
    config.validate()
    train_part, validation = split_validation(train_set, config.validation_fraction, config.seed, hop)
    golds = [ex.label for ex in validation]

    model = mdl.clone_model(model_in)
    params = model.parameters()
    schedule = optim.build_llrd_schedule(config.base_lr, config.zeta, len(model.groups))
    state = optim.OptimizerState(variant=config.optimizer, weight_decay=config.weight_decay)
    rng = np.random.default_rng([config.seed, 1])

    epoch_f1: List[float] = []
    best_epoch, best_f1, best_snapshot = 0, -1.0, None
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(train_part))
        for start in range(0, len(order), config.batch_size):
            batch = [train_part[int(i)] for i in order[start:start + config.batch_size]]
            with GradTape() as tape:
                loss, _ = mdl.forward_loss(model, batch)
            optim.step(model, tape.gradient(loss, params), schedule, state)

        f1 = f1_binary_macro(mdl.predict_labels(model, validation), golds)
        epoch_f1.append(f1)
        logger.debug(f"hop {hop} epoch {epoch}: validation F1 {f1:.4f}")
        if f1 > best_f1:
            best_epoch, best_f1, best_snapshot = epoch, f1, mdl.snapshot(model)

    mdl.restore(model, best_snapshot)
    record = HopRecord(
        hop=hop,
        combo=combo if combo is not None else train_set[0].combo,
        method=method,
        chosen_epoch=best_epoch,
        validation_f1=best_f1,
        epoch_f1=epoch_f1,
        train_size=len(train_set),
        seed=config.seed,
    )
    return model, record


# =============================================================================
# EVALUATION
# =============================================================================

def evaluate(model: ModelParams, corpus: Corpus, hop: int, train_combo: Optional[Combo],
             workers: int = DEFAULT_EVAL_WORKERS) -> HopResult:
    """F1 on all K x C test sets; workers > 1 scores test sets concurrently."""
    combos = [Combo(lang, cat) for lang in corpus.languages for cat in corpus.categories]

    def score(combo: Combo) -> Tuple[float, List[int]]:
        examples = corpus.test_suite[combo]
        preds = mdl.predict_labels(model, examples)
        return f1_binary_macro(preds, [ex.label for ex in examples]), preds

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            scored = list(pool.map(score, combos))
    else:
        scored = [score(combo) for combo in combos]

    num_cats = len(corpus.categories)
    f1 = [[scored[lang * num_cats + cat][0] for cat in corpus.categories] for lang in corpus.languages]
    predicted_positive = sum(sum(preds) for _, preds in scored)
    predicted_total = sum(len(preds) for _, preds in scored)
    return HopResult(hop, train_combo, f1, predicted_positive, predicted_total)


# =============================================================================
# SEQUENCES
# =============================================================================

class HopSink(Protocol):
    """Receives hop outcomes as they happen (persistence, run logs)."""

    def on_baseline(self, result: HopResult) -> None: ...

    def on_hop(self, record: HopRecord, result: HopResult, model: ModelParams) -> None: ...

    def on_failure(self, hop: int, error: BaseException) -> None: ...


def _check_alignment(sequence: HopSequence, corpus: Corpus) -> None:
    for i, combo in enumerate(sequence.combos, 1):
        if combo.lang not in corpus.languages or combo.category not in corpus.categories:
            raise SequenceError(f"hop {i} combination {combo} is outside the corpus")


def _run_sequence_core(model0: ModelParams, sequence: HopSequence, method: Method,
                       train_cfg: TrainConfig, augment_cfg: AugmentConfig, corpus: Corpus,
                       translator: Optional[Translator], sinks: Sequence[HopSink] = (),
                       start_hop: int = 1, eval_workers: int = DEFAULT_EVAL_WORKERS,
                       collapse_threshold: float = DEFAULT_COLLAPSE_THRESHOLD,
                       ) -> Iterator[Tuple[HopRecord, HopResult, ModelParams]]:
    """
    Single source of truth for sequential fine-tuning.

    Yields (record, result, model) after each hop once every sink has seen it.
    start_hop > 1 resumes from model0 as the checkpoint of hop start_hop - 1.
    """
    method = Method.parse(method)
    train_cfg.validate()
    _check_alignment(sequence, corpus)
    if method.uses_translation and translator is None:
        raise ConfigError(f"method {method.value} needs a translator", key="method")
    if not 1 <= start_hop <= len(sequence) + 1:
        raise SequenceError(f"cannot start at hop {start_hop} of a {len(sequence)}-hop sequence")

    hop_cfg = replace(train_cfg, zeta=method.effective_zeta(train_cfg.zeta))
    for combo in sequence.combos[:start_hop - 1]:
        corpus.release(combo)

    if start_hop == 1 and len(sequence) > 0:
        baseline = evaluate(model0, corpus, 0, None, eval_workers)
        for sink in sinks:
            sink.on_baseline(baseline)

    model = model0
    done: List[Tuple[HopRecord, HopResult]] = []
    for hop in range(start_hop, len(sequence) + 1):
        combo = sequence.combos[hop - 1]
        name = corpus.combo_name(combo)
        logger.info(f"[RUNNING] hop {hop}/{len(sequence)} {name} ({method.value})")
        try:
            train_set = make_training_set(corpus, combo, train_cfg.train_size,
                                          hop_seed(train_cfg.seed, hop, STREAM_SAMPLE))
            corpus.release(combo)
            if method.uses_translation:
                train_set = augment(train_set, corpus.languages, combo.lang,
                                    replace(augment_cfg, seed=hop_seed(train_cfg.seed, hop, STREAM_AUGMENT)),
                                    translator)
            model, record = run_hop(model, train_set,
                                    replace(hop_cfg, seed=hop_seed(train_cfg.seed, hop, STREAM_TRAIN)),
                                    hop=hop, method=method.value, combo=combo)
            del train_set

            result = evaluate(model, corpus, hop, combo, eval_workers)
            record.majority_fraction = result.majority_fraction()
            record.collapsed = record.majority_fraction >= collapse_threshold
            if record.collapsed:
                logger.warning(f"hop {hop} {name}: {record.majority_fraction:.1%} of test "
                               f"predictions share one label (collapsed)")
            for sink in sinks:
                sink.on_hop(record, result, model)
        except Exception as e:
            logger.error(f"[ERROR] hop {hop} {name} failed: {e}")
            for sink in sinks:
                sink.on_failure(hop, e)
            raise TrainingError(f"{name} failed: {e}", hop, list(done)) from e

        done.append((record, result))
        logger.info(f"[OK] hop {hop} {name}: epoch {record.chosen_epoch}, "
                    f"validation F1 {record.validation_f1:.4f}")
        yield record, result, model


def iter_sequence(*args, **kwargs) -> Iterator[Tuple[HopRecord, HopResult, ModelParams]]:
    """Streaming wrapper: yields each hop as soon as it is persisted."""
    yield from _run_sequence_core(*args, **kwargs)


def run_sequence(model0: ModelParams, sequence: HopSequence, method: Method,
                 train_cfg: TrainConfig, augment_cfg: AugmentConfig, corpus: Corpus,
                 translator: Optional[Translator], **kwargs) -> List[Tuple[HopRecord, HopResult]]:
    """Run every hop and return the (record, result) pairs in hop order."""
    return [
        (record, result)
        for record, result, _ in _run_sequence_core(model0, sequence, method, train_cfg,
                                                    augment_cfg, corpus, translator, **kwargs)
    ]
