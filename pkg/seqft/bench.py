"""
Bench - Prepackaged experiment suites.

A suite file names a shared base configuration, a set of sequence seeds and
a set of methods; every (sequence, method) pair becomes one run. All members
share the corpus seed and the pinned sequence files, so hop i of every
method trains on the same sampled D_i.

Operations:
- BenchSuite.load: read a suite definition file
- run_suite: execute (or resume) every member, then the comparison and
  zeta-sweep tables
- run_zeta_sweep: single-hop fine-tunes per language across LLRD settings
"""

import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import (
    RESUME_MARKER_FILE,
    STREAM_AUGMENT,
    STREAM_SAMPLE,
    STREAM_TRAIN,
    SUITE_COMPARISON_CSV,
    SUITE_COMPARISON_TEXT,
    SUITE_FAILURES_FILE,
    SUITE_RUNS_DIR,
    SUITE_SEQUENCES_DIR,
    SUITE_ZETA_SWEEP_CSV,
    SUITE_ZETA_SWEEP_TEXT,
    SUMMARY_DECIMALS,
    SUMMARY_JSON_FILE,
    SUMMARY_SCALE,
    ZETA_SWEEP_VALUES,
)

from . import metrics, report
from .augment import augment
from .corpus import make_training_set
from .errors import ConfigError, SeqFTError
from .run_config import RunConfig, format_value
from .runner import build_corpus, build_translator, execute_run, initial_model
from .sequence import Combo, build_sequence, read_sequence_file, write_sequence_file
from .state import RunSummary
from .trainer import evaluate, hop_seed, run_hop

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SuiteMember:
    name: str
    sequence_id: str
    sequence_seed: int
    method: str
    zeta: float


@dataclass
class BenchSuite:
    name: str
    description: str = ""
    base: Dict[str, Any] = field(default_factory=dict)  # dotted config overrides
    sequences: List[Dict[str, Any]] = field(default_factory=list)  # [{"id", "seed"}]
    methods: List[Dict[str, Any]] = field(default_factory=list)  # [{"method", "zeta"}]
    zeta_sweep: Optional[Dict[str, Any]] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def load(cls, path: str) -> "BenchSuite":
        if not os.path.exists(path):
            raise FileNotFoundError(f"Suite file not found: {path}")
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
        unknown = set(data) - {"name", "description", "base", "sequences", "methods", "zeta_sweep", "metadata"}
        if unknown:
            raise ConfigError(f"{path}: unknown suite fields {sorted(unknown)}")
        suite = cls(
            name=data.get("name", os.path.splitext(os.path.basename(path))[0]),
            description=data.get("description", ""),
            base=dict(data.get("base", {})),
            sequences=list(data.get("sequences", [])),
            methods=list(data.get("methods", [])),
            zeta_sweep=data.get("zeta_sweep"),
            metadata=dict(data.get("metadata", {})),
        )
        suite.base_config()
        return suite

    def base_config(self) -> RunConfig:
        """Shared configuration; the corpus seed is pinned for every member."""
        pairs = [f"{key}={format_value(value)}" for key, value in self.base.items()]
        config = RunConfig.load(overrides=pairs)
        if config["corpus.seed"] is None:
            config = config.updated(corpus__seed=config["seed"])
        return config

    def members(self) -> List[SuiteMember]:
        if not self.sequences or not self.methods:
            raise ConfigError(f"suite {self.name!r} needs at least one sequence and one method")
        members = []
        for seq in self.sequences:
            for entry in self.methods:
                method = entry["method"]
                zeta = float(entry.get("zeta", 1.0))
                suffix = method if zeta == 1.0 else f"{method}-z{zeta:g}"
                members.append(SuiteMember(f"{seq['id']}-{suffix}", seq["id"], int(seq["seed"]), method, zeta))
        return members

    def member_config(self, member: SuiteMember, sequence_file: str) -> RunConfig:
        return self.base_config().updated(
            seed=member.sequence_seed,
            method=member.method,
            train__zeta=member.zeta,
            sequence__file=sequence_file,
            sequence__id=member.sequence_id,
            sequence__seed=member.sequence_seed,
        )


@dataclass
class SuiteReport:
    summaries: List[Tuple[SuiteMember, RunSummary]]
    failures: Dict[str, str]
    comparison: pd.DataFrame
    zeta_sweep: Optional[pd.DataFrame] = None


# =============================================================================
# SUITE EXECUTION
# =============================================================================

def write_suite_sequences(suite: BenchSuite, out_dir: str) -> Dict[str, str]:
    """Sequence files shared by all members; existing files are reused as-is."""
    config = suite.base_config()
    lang_names, category_names = config.corpus_names()
    seq_dir = os.path.join(out_dir, SUITE_SEQUENCES_DIR)
    os.makedirs(seq_dir, exist_ok=True)
    paths = {}
    for seq in suite.sequences:
        path = os.path.join(seq_dir, f"{seq['id']}.txt")
        if os.path.exists(path):
            read_sequence_file(path, lang_names, category_names)
        else:
            sequence = build_sequence(list(range(len(lang_names))), list(range(len(category_names))),
                                      config["sequence.hops"], int(seq["seed"]), seq["id"])
            write_sequence_file(path, sequence, lang_names, category_names)
        paths[seq["id"]] = os.path.abspath(path)
    return paths


def _member_state(run_dir: str) -> str:
    if not os.path.isdir(run_dir) or not os.listdir(run_dir):
        return "new"
    if os.path.exists(os.path.join(run_dir, SUMMARY_JSON_FILE)) and \
            not os.path.exists(os.path.join(run_dir, RESUME_MARKER_FILE)):
        return "done"
    return "partial"


def _run_member(args: Tuple[str, Dict[str, Any], str, Optional[Callable]]) -> Tuple[str, Optional[dict], Optional[str]]:
    """Process-pool entry point: (name, summary dict, error)."""
    name, values, run_dir, sink_factory = args
    try:
        state = _member_state(run_dir)
        if state == "done":
            logger.info(f"[OK] {name}: already complete")
            return name, report.load_run(run_dir).summary.to_dict(), None
        sinks = [sink_factory(run_dir)] if sink_factory is not None else []
        data = execute_run(RunConfig(values), run_dir, resume=(state == "partial"), sinks=sinks)
        return name, None if data is None else data.summary.to_dict(), None
    except (SeqFTError, OSError) as e:
        logger.error(f"[ERROR] {name}: {e}")
        return name, None, str(e)
    except Exception as e:
        logger.error(f"[ERROR] {name}: unexpected {type(e).__name__}: {e}")
        return name, None, f"{type(e).__name__}: {e}"


def comparison_frame(rows: Sequence[Tuple[SuiteMember, RunSummary]]) -> pd.DataFrame:
    frame = report.summary_frame([(member.name, summary) for member, summary in rows])
    frame.insert(1, "Sequence", [member.sequence_id for member, _ in rows])
    frame.insert(2, "Method", [member.method for member, _ in rows])
    frame.insert(3, "Zeta", [f"{member.zeta:g}" for member, _ in rows])
    return frame


def run_suite(suite: BenchSuite, out_dir: str, workers: int = 1,
              sink_factory: Optional[Callable[[str], Any]] = None,
              with_zeta_sweep: bool = True) -> SuiteReport:
    """
    Execute every member of the suite into out_dir/runs/<member>.

    Completed members are skipped and interrupted ones resumed, so calling
    this again after a failure only redoes what is missing. A failing member
    is recorded in failures.json and the remaining members still run.
    """
    os.makedirs(out_dir, exist_ok=True)
    sequence_files = write_suite_sequences(suite, out_dir)
    members = suite.members()
    jobs = [
        (m.name, suite.member_config(m, sequence_files[m.sequence_id]).values,
         os.path.join(out_dir, SUITE_RUNS_DIR, m.name), sink_factory)
        for m in members
    ]
    os.makedirs(os.path.join(out_dir, SUITE_RUNS_DIR), exist_ok=True)

    logger.info(f"[RUNNING] suite {suite.name}: {len(jobs)} runs, {workers} worker(s)")
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_run_member, jobs))
    else:
        outcomes = [_run_member(job) for job in jobs]

    by_name = {m.name: m for m in members}
    summaries, failures = [], {}
    for name, summary, error in outcomes:
        if error is not None:
            failures[name] = error
        elif summary is not None:
            summaries.append((by_name[name], RunSummary.from_dict(summary)))

    failures_path = os.path.join(out_dir, SUITE_FAILURES_FILE)
    if failures:
        with open(failures_path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(failures, f, indent=2, sort_keys=True)
            f.write("\n")
        logger.warning(f"{len(failures)} suite run(s) failed: {', '.join(sorted(failures))}")
    elif os.path.exists(failures_path):
        os.remove(failures_path)

    comparison = comparison_frame(summaries)
    comparison.to_csv(os.path.join(out_dir, SUITE_COMPARISON_CSV), index=False, lineterminator="\n")
    with open(os.path.join(out_dir, SUITE_COMPARISON_TEXT), "w", encoding="utf-8", newline="\n") as f:
        f.write(comparison.to_string(index=False) + "\n")

    sweep = None
    if with_zeta_sweep and suite.zeta_sweep is not None:
        sweep = run_zeta_sweep(suite.base_config(), suite.zeta_sweep.get("category"),
                               suite.zeta_sweep.get("zetas", ZETA_SWEEP_VALUES))
        write_zeta_sweep(sweep, out_dir)
    return SuiteReport(summaries, failures, comparison, sweep)


# =============================================================================
# ZETA SWEEP
# =============================================================================

def run_zeta_sweep(config: RunConfig, category: Optional[str] = None,
                   zetas: Sequence[float] = ZETA_SWEEP_VALUES) -> pd.DataFrame:
    """
    Average F1 over all test sets after one fine-tune from M0, per language
    and LLRD setting.

    Every language trains on its own training set of one fixed category
    (the first category unless named). Translation augmentation follows the
    configured method. Rows are languages plus a final mean row; columns are
    the zeta values as fractions in [0, 1].
    """
    lang_names, category_names = config.corpus_names()
    if category is None:
        category = category_names[0]
    if category not in category_names:
        raise ConfigError(f"unknown category {category!r}", key="zeta_sweep.category")
    cat = category_names.index(category)
    method = config.method
    train_cfg = config.train_config()
    corpus = build_corpus(config)
    translator = build_translator(config, corpus)
    if method.uses_translation and translator is None:
        raise ConfigError(f"method {method.value} needs a translator", key="method")
    model0 = initial_model(config, corpus)

    rows = []
    for lang in corpus.languages:
        combo = Combo(lang, cat)
        train_set = make_training_set(corpus, combo, train_cfg.train_size,
                                      hop_seed(train_cfg.seed, 1, STREAM_SAMPLE))
        if method.uses_translation:
            train_set = augment(train_set, corpus.languages, lang,
                                replace(config.augment_config(), seed=hop_seed(train_cfg.seed, 1, STREAM_AUGMENT)),
                                translator)
        row = {"language": corpus.lang_names[lang]}
        for zeta in zetas:
            cfg = replace(train_cfg, zeta=float(zeta), seed=hop_seed(train_cfg.seed, 1, STREAM_TRAIN))
            model, _ = run_hop(model0, train_set, cfg, hop=1, method=method.value, combo=combo)
            row[f"{float(zeta):g}"] = metrics.hopwise_avg(evaluate(model, corpus, 1, combo,
                                                                   config["eval.workers"]))
        logger.info(f"[OK] zeta sweep {corpus.combo_name(combo)}")
        rows.append(row)

    frame = pd.DataFrame(rows)
    columns = [f"{float(z):g}" for z in zetas]
    mean_row = {"language": "mean"}
    for col in columns:
        total = 0.0
        for value in frame[col]:
            total += float(value)
        mean_row[col] = total / len(frame)
    return pd.concat([frame, pd.DataFrame([mean_row])], ignore_index=True)


def write_zeta_sweep(frame: pd.DataFrame, out_dir: str) -> None:
    frame.to_csv(os.path.join(out_dir, SUITE_ZETA_SWEEP_CSV), index=False, lineterminator="\n")
    scaled = frame.copy()
    for col in scaled.columns[1:]:
        scaled[col] = [f"{v * SUMMARY_SCALE:.{SUMMARY_DECIMALS}f}" for v in scaled[col]]
    with open(os.path.join(out_dir, SUITE_ZETA_SWEEP_TEXT), "w", encoding="utf-8", newline="\n") as f:
        f.write(scaled.to_string(index=False) + "\n")
