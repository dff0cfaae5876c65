"""
Run Logger: human-readable markdown log of a run, one entry per hop.

Written next to the machine-readable run files; timestamps make it differ
between otherwise identical runs, so it is never compared byte-for-byte.
"""
import os
from datetime import datetime

from config import DISPLAY_TIMESTAMP_FORMAT, RUN_LOG_FILE, SUMMARY_DECIMALS, SUMMARY_SCALE
from seqft import metrics
from seqft.model import ModelParams
from seqft.state import HopRecord, HopResult


def _pct(value: float) -> str:
    return f"{value * SUMMARY_SCALE:.{SUMMARY_DECIMALS}f}"


class RunLogger:
    """Appends markdown entries to <run_dir>/run_log.md as hops complete."""

    def __init__(self, run_dir: str):
        self.run_dir = run_dir
        self.log_file = os.path.join(run_dir, RUN_LOG_FILE)

    def _ensure_header(self) -> None:
        if os.path.exists(self.log_file):
            return
        os.makedirs(self.run_dir, exist_ok=True)
        with open(self.log_file, "w", encoding="utf-8") as f:
            f.write("# Sequential Fine-Tuning - Run Log\n\n")
            f.write(f"**Run directory:** {self.run_dir}\n\n")
            f.write("---\n\n")

    def _append(self, entry: str) -> None:
        self._ensure_header()
        with open(self.log_file, "a", encoding="utf-8") as f:
            f.write(entry)

    def on_baseline(self, result: HopResult) -> None:
        """Pre-fine-tuning evaluation of M0 (not part of any metric)."""
        timestamp = datetime.now().strftime(DISPLAY_TIMESTAMP_FORMAT)
        per_lang = ", ".join(_pct(v) for v in metrics.per_language_average(result))
        self._append(f"""## Hop 0 - initial model
*{timestamp}*

- Hop-wise F1: {_pct(metrics.hopwise_avg(result))}
- Per-language F1: {per_lang}

---

""")

    def on_hop(self, record: HopRecord, result: HopResult, model: ModelParams) -> None:
        timestamp = datetime.now().strftime(DISPLAY_TIMESTAMP_FORMAT)
        epochs = ", ".join(_pct(v) for v in record.epoch_f1)
        per_lang = ", ".join(_pct(v) for v in metrics.per_language_average(result))
        entry = f"""## Hop {record.hop} - lang {record.combo.lang}, category {record.combo.category}
*{timestamp}*

- Method: {record.method}
- Training examples: {record.train_size}
- Validation F1 per epoch: {epochs}
- Chosen epoch: {record.chosen_epoch} (validation F1 {_pct(record.validation_f1)})
- Hop-wise F1: {_pct(metrics.hopwise_avg(result))}
- Per-language F1: {per_lang}
- Majority-label share: {_pct(record.majority_fraction)}%
"""
        if record.collapsed:
            entry += "- **Collapsed:** nearly every test prediction has the same label\n"
        entry += "\n---\n\n"
        self._append(entry)

    def on_failure(self, hop: int, error: BaseException) -> None:
        timestamp = datetime.now().strftime(DISPLAY_TIMESTAMP_FORMAT)
        self._append(f"""## Hop {hop} - FAILED
*{timestamp}*

**Error:** {type(error).__name__}: {error}

Resume with `--resume` to continue from the last completed hop.

---

""")
