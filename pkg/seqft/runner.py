"""
Runner - Execute one configured run into a run directory.

This module contains the end-to-end plumbing shared by the CLI and the bench
suites:
- build_corpus / build_translator / resolve_sequence / initial_model
- execute_run: fresh or resumed run, then summary, forgetting table and plot
"""

import logging
import os
from typing import Optional, Sequence

from config import PLOT_FILE, STREAM_MODEL_INIT

from . import metrics, report
from .corpus import (
    Corpus,
    OracleTranslator,
    TranslationMemoryTranslator,
    Translator,
    Vocabulary,
    build_marc_corpus,
    gen_synthetic_corpus,
)
from .errors import ConfigError, SequenceError
from .model import ModelParams, init_model
from .run_config import RunConfig
from .run_store import RunStore
from .sequence import HopSequence, build_sequence, read_sequence_file, write_sequence_file
from .trainer import HopSink, hop_seed, iter_sequence

logger = logging.getLogger(__name__)


def build_corpus(config: RunConfig) -> Corpus:
    """MARC files when data.marc_path is set, the synthetic corpus otherwise."""
    if config["data.marc_path"] is None:
        return gen_synthetic_corpus(config.corpus_spec())
    if config["data.marc_test_path"] is None:
        raise ConfigError("a MARC training file needs a MARC test file", key="data.marc_test_path")
    lang_names, category_names = config.corpus_names()
    return build_marc_corpus(config["data.marc_path"], config["data.marc_test_path"],
                             config["data.test_size"], config["data.hash_buckets"],
                             lang_names, category_names)


def build_translator(config: RunConfig, corpus: Corpus) -> Optional[Translator]:
    if config["data.translation_memory"] is not None:
        return TranslationMemoryTranslator(config["data.translation_memory"], corpus.lang_names,
                                           corpus.tokenizer)
    if isinstance(corpus.tokenizer, Vocabulary):
        return OracleTranslator(corpus.tokenizer)
    return None


def resolve_sequence(config: RunConfig, corpus: Corpus) -> HopSequence:
    """The pinned sequence file if one is configured, a freshly sampled one otherwise."""
    if config["sequence.file"] is not None:
        sequence = read_sequence_file(config["sequence.file"], corpus.lang_names, corpus.category_names)
        if len(sequence) != config["sequence.hops"]:
            logger.warning(f"Sequence file has {len(sequence)} hops; sequence.hops={config['sequence.hops']} ignored")
        return sequence
    return build_sequence(corpus.languages, corpus.categories, config["sequence.hops"],
                          config.sequence_seed, config["sequence.id"])


def initial_model(config: RunConfig, corpus: Corpus) -> ModelParams:
    """M0: a deterministic initialisation derived from the run seed."""
    period = corpus.tokenizer.spec.tokens_per_lang if isinstance(corpus.tokenizer, Vocabulary) else 0
    return init_model(config.model_config(corpus.vocab_size, period),
                      hop_seed(config["seed"], 0, STREAM_MODEL_INIT))


def execute_run(config: Optional[RunConfig], run_dir: str, force: bool = False,
                resume: bool = False, sinks: Sequence[HopSink] = ()) -> Optional[report.RunData]:
    """
    Run (or resume) every hop of a configured sequence into run_dir.

    A resumed run reads its configuration and sequence back from the run
    directory, reloads the last completed checkpoint and continues with the
    next hop. Returns the loaded run once the summary files are written, or
    None for an empty sequence.
    """
    if resume:
        snapshot = RunStore(run_dir, (), ()).config_path
        if not os.path.exists(snapshot):
            raise FileNotFoundError(f"Cannot resume: no configuration snapshot in {run_dir}")
        config = RunConfig.load(snapshot)
    elif config is None:
        raise ConfigError("a configuration is required for a fresh run")

    lang_names, category_names = config.corpus_names()
    store = RunStore(run_dir, lang_names, category_names)
    completed = store.create(force=force, resume=resume)

    corpus = build_corpus(config)
    if resume:
        sequence = read_sequence_file(store.sequence_path, corpus.lang_names, corpus.category_names)
    else:
        sequence = resolve_sequence(config, corpus)
        config.write_snapshot(store.config_path)
        write_sequence_file(store.sequence_path, sequence, corpus.lang_names, corpus.category_names)
    if completed > len(sequence):
        raise SequenceError(f"{run_dir} has {completed} completed hops but the sequence has {len(sequence)}")

    if completed > 0:
        model, _ = store.load_model(completed)
    else:
        model = initial_model(config, corpus)

    logger.info(f"[RUNNING] {os.path.basename(os.path.normpath(run_dir))}: {len(sequence)} hops, "
                f"method {config['method']}, starting at hop {completed + 1}")
    for _ in iter_sequence(
        model, sequence, config.method, config.train_config(), config.augment_config(), corpus,
        build_translator(config, corpus),
        sinks=[store, *sinks],
        start_hop=completed + 1,
        eval_workers=config["eval.workers"],
        collapse_threshold=config["eval.collapse_threshold"],
    ):
        pass
    store.mark_complete()

    if len(sequence) == 0:
        logger.info(f"[OK] {run_dir}: empty sequence, nothing to summarise")
        return None
    data = report.load_run(run_dir)
    store.write_summary(data.summary, report.summary_table([(data.name, data.summary)]),
                        metrics.forgetting_table(data.results, lang_names, category_names))
    report.write_svg(os.path.join(run_dir, PLOT_FILE), report.render_hopwise_svg(data))
    logger.info(f"[OK] {data.name}: overall F1 {data.summary.formatted()['Overall F1']}")
    return data
