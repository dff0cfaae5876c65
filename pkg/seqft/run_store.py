"""
Run directory persistence.

Layout of one run directory:

    config.txt          resolved configuration snapshot
    sequence.txt        the hop sequence actually trained
    hop_001/            one directory per completed hop
        checkpoint.npz  chosen-epoch parameters
        results.csv     F1 per test set
        record.json     hop record; written last, marks the hop complete
    metrics.csv         long-format F1 rows, K*C per completed hop
    summary.json/.txt   run summary
    forgetting.csv      per-language and per-category forgetting
    RESUME              present while a run is interrupted
"""

import json
import logging
import os
import shutil
from typing import List, Optional, Sequence, Tuple

import pandas as pd

from config import (
    CHECKPOINT_FILE,
    CONFIG_SNAPSHOT_FILE,
    ERROR_EMPTY_RUN_DIR,
    ERROR_OUT_DIR_NOT_EMPTY,
    ERROR_PARENT_MISSING,
    ERROR_RUN_EXISTS,
    FORGETTING_FILE,
    HOP_DIR_FORMAT,
    HOP_RECORD_FILE,
    HOP_RESULTS_FILE,
    METRICS_COLUMNS,
    METRICS_FILE,
    RESUME_MARKER_FILE,
    SEQUENCE_FILE,
    SUMMARY_JSON_FILE,
    SUMMARY_TEXT_FILE,
)

from . import model as mdl
from .errors import CheckpointError, RunDirectoryError
from .model import ModelParams
from .sequence import Combo
from .state import HopRecord, HopResult, RunSummary

logger = logging.getLogger(__name__)


def prepare_output_dir(path: str, force: bool = False) -> None:
    """Create path; an existing non-empty directory needs force (and is cleared)."""
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(parent):
        raise RunDirectoryError(ERROR_PARENT_MISSING.format(path=path), path)
    if os.path.isdir(path) and os.listdir(path):
        if not force:
            raise RunDirectoryError(ERROR_OUT_DIR_NOT_EMPTY.format(path=path), path)
        shutil.rmtree(path)
    os.makedirs(path, exist_ok=True)


class RunStore:
    """Reads and writes one run directory; implements the trainer's HopSink."""

    def __init__(self, run_dir: str, lang_names: Sequence[str], category_names: Sequence[str]):
        self.run_dir = run_dir
        self.lang_names = tuple(lang_names)
        self.category_names = tuple(category_names)

    def path(self, *parts: str) -> str:
        return os.path.join(self.run_dir, *parts)

    def hop_dir(self, hop: int) -> str:
        return self.path(HOP_DIR_FORMAT.format(hop))

    # ---- lifecycle ---------------------------------------------------------

    def create(self, force: bool = False, resume: bool = False) -> int:
        """Prepare the directory; returns the number of hops already completed."""
        if resume:
            if not os.path.isdir(self.run_dir):
                raise RunDirectoryError(ERROR_EMPTY_RUN_DIR.format(path=self.run_dir), self.run_dir)
            completed = self.completed_hops()
            self._truncate_metrics(completed)
            logger.info(f"Resuming {self.run_dir} after hop {completed}")
            return completed
        if os.path.isdir(self.run_dir) and os.listdir(self.run_dir) and not force:
            raise RunDirectoryError(ERROR_RUN_EXISTS.format(path=self.run_dir), self.run_dir)
        prepare_output_dir(self.run_dir, force=force)
        return 0

    def completed_hops(self) -> int:
        """Length of the contiguous run of completed hops starting at hop 1."""
        hop = 0
        while os.path.exists(os.path.join(self.hop_dir(hop + 1), HOP_RECORD_FILE)):
            hop += 1
        return hop

    def is_interrupted(self) -> bool:
        return os.path.exists(self.path(RESUME_MARKER_FILE))

    def mark_complete(self) -> None:
        marker = self.path(RESUME_MARKER_FILE)
        if os.path.exists(marker):
            os.remove(marker)

    # ---- HopSink -----------------------------------------------------------

    def on_baseline(self, result: HopResult) -> None:
        pass

    def on_hop(self, record: HopRecord, result: HopResult, model: ModelParams) -> None:
        hop_dir = self.hop_dir(record.hop)
        os.makedirs(hop_dir, exist_ok=True)
        checkpoint = os.path.join(hop_dir, CHECKPOINT_FILE)
        mdl.save_checkpoint(model, checkpoint, {
            "hop": record.hop,
            "method": record.method,
            "epoch": record.chosen_epoch,
            "validation_f1": record.validation_f1,
            "seed": record.seed,
        })
        record.checkpoint_path = os.path.relpath(checkpoint, self.run_dir)

        self._results_frame(result).drop(columns=["hop", "train_lang", "train_category"]).to_csv(
            os.path.join(hop_dir, HOP_RESULTS_FILE), index=False, lineterminator="\n")
        self._append_metrics(result)
        with open(os.path.join(hop_dir, HOP_RECORD_FILE), "w", encoding="utf-8", newline="\n") as f:
            json.dump(record.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def on_failure(self, hop: int, error: BaseException) -> None:
        with open(self.path(RESUME_MARKER_FILE), "w", encoding="utf-8", newline="\n") as f:
            json.dump({"next_hop": hop, "error": str(error)}, f, indent=2)
            f.write("\n")

    # ---- metrics.csv -------------------------------------------------------

    def _results_frame(self, result: HopResult) -> pd.DataFrame:
        combo = result.train_combo
        return pd.DataFrame(
            [
                [result.hop, self.lang_names[combo.lang], self.category_names[combo.category],
                 self.lang_names[lang], self.category_names[cat], result.f1[lang][cat]]
                for lang in range(result.num_langs) for cat in range(result.num_categories)
            ],
            columns=METRICS_COLUMNS,
        )

    def _append_metrics(self, result: HopResult) -> None:
        path = self.path(METRICS_FILE)
        self._results_frame(result).to_csv(path, mode="a", header=not os.path.exists(path),
                                           index=False, lineterminator="\n")

    def _read_metrics(self) -> pd.DataFrame:
        path = self.path(METRICS_FILE)
        if not os.path.exists(path):
            return pd.DataFrame(columns=METRICS_COLUMNS)
        return pd.read_csv(path, float_precision="round_trip", keep_default_na=False)

    def _truncate_metrics(self, completed: int) -> None:
        """Drop rows of a hop that was interrupted before its record was written."""
        frame = self._read_metrics()
        kept = frame[frame["hop"] <= completed]
        if len(kept) != len(frame):
            kept.to_csv(self.path(METRICS_FILE), index=False, lineterminator="\n")

    # ---- reading -----------------------------------------------------------

    def load_records(self) -> List[HopRecord]:
        records = []
        for hop in range(1, self.completed_hops() + 1):
            with open(os.path.join(self.hop_dir(hop), HOP_RECORD_FILE), "r", encoding="utf-8") as f:
                records.append(HopRecord.from_dict(json.load(f)))
        return records

    def load_results(self) -> List[HopResult]:
        """HopResults of all completed hops rebuilt from metrics.csv."""
        completed = self.completed_hops()
        if completed == 0:
            raise RunDirectoryError(ERROR_EMPTY_RUN_DIR.format(path=self.run_dir), self.run_dir)
        frame = self._read_metrics()
        lang_ids = {name: i for i, name in enumerate(self.lang_names)}
        cat_ids = {name: i for i, name in enumerate(self.category_names)}
        results = []
        for hop in range(1, completed + 1):
            rows = frame[frame["hop"] == hop]
            if rows.empty:
                raise CheckpointError(f"{self.run_dir}: hop {hop} is complete but has no metrics rows")
            if len(rows) != len(lang_ids) * len(cat_ids):
                raise CheckpointError(f"{self.run_dir}: hop {hop} has {len(rows)} metrics rows, "
                                      f"expected {len(lang_ids) * len(cat_ids)}")
            f1 = [[0.0] * len(cat_ids) for _ in lang_ids]
            for row in rows.itertuples(index=False):
                f1[lang_ids[row.test_lang]][cat_ids[row.test_category]] = float(row.f1)
            first = rows.iloc[0]
            combo = Combo(lang_ids[first["train_lang"]], cat_ids[first["train_category"]])
            results.append(HopResult(hop, combo, f1))
        return results

    def load_model(self, hop: int) -> Tuple[ModelParams, dict]:
        path = os.path.join(self.hop_dir(hop), CHECKPOINT_FILE)
        if not os.path.exists(path):
            raise FileNotFoundError(f"Checkpoint not found: {path}")
        return mdl.load_checkpoint(path)

    # ---- summaries ---------------------------------------------------------

    def write_summary(self, summary: RunSummary, table_text: str,
                      forgetting_rows: Optional[List[dict]] = None) -> None:
        with open(self.path(SUMMARY_JSON_FILE), "w", encoding="utf-8", newline="\n") as f:
            json.dump(summary.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        with open(self.path(SUMMARY_TEXT_FILE), "w", encoding="utf-8", newline="\n") as f:
            f.write(table_text.rstrip("\n") + "\n")
        if forgetting_rows is not None:
            pd.DataFrame(forgetting_rows, columns=["axis", "name", "peak", "final", "forgetting"]).to_csv(
                self.path(FORGETTING_FILE), index=False, lineterminator="\n")

    def load_summary(self) -> Optional[RunSummary]:
        path = self.path(SUMMARY_JSON_FILE)
        if not os.path.exists(path):
            return None
        with open(path, "r", encoding="utf-8") as f:
            return RunSummary.from_dict(json.load(f))

    @property
    def config_path(self) -> str:
        return self.path(CONFIG_SNAPSHOT_FILE)

    @property
    def sequence_path(self) -> str:
        return self.path(SEQUENCE_FILE)
