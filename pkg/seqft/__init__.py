"""
seqft Package - Translation-augmented sequential fine-tuning

This package trains one multilingual sentiment classifier through a sequence
of (language, category) hops and measures how much it keeps and transfers.

Modules:
- numerics: float64 tensors and the reverse-mode gradient tape
- model: layered attention classifier, checkpoints
- optim: LLRD schedules, plain SGD and AdamW updates
- corpus: synthetic and MARC corpora, training sets, translators
- augment: translation augmentation of a hop's training set
- sequence: hop sequences and sequence files
- trainer: run_hop, evaluate and the sequence loop
- metrics: F1, quadrant scores, forgetting
- run_config / run_store / runner / report: run directories end to end
- bench: prepackaged suites and the zeta sweep

Public API:
- run_sequence / iter_sequence: collecting and streaming sequence execution
- run_hop, evaluate: one hop of fine-tuning, one evaluation
- execute_run: configured run into a run directory (fresh or resumed)
- summarize: sequence metrics of a run
"""

# State classes
from .state import HopRecord, HopResult, RunSummary

# Errors
from .errors import (
    ConfigError,
    CorpusError,
    MetricsError,
    PrivacyError,
    SeqFTError,
    TrainingError,
)

# Core functions
from .trainer import (
    Method,
    TrainConfig,
    evaluate,
    hop_seed,
    iter_sequence,
    run_hop,
    run_sequence,
)
from .metrics import f1_binary_macro, quadrant_scores, summarize
from .runner import execute_run
from .run_config import RunConfig


__all__ = [
    # State classes
    "HopRecord",
    "HopResult",
    "RunSummary",

    # Errors
    "SeqFTError",
    "ConfigError",
    "CorpusError",
    "PrivacyError",
    "TrainingError",
    "MetricsError",

    # Core functions
    "Method",
    "TrainConfig",
    "run_hop",
    "evaluate",
    "hop_seed",
    "run_sequence",
    "iter_sequence",
    "f1_binary_macro",
    "quadrant_scores",
    "summarize",
    "execute_run",
    "RunConfig",
]
