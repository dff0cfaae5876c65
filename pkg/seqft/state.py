"""
Run State - Data classes shared by the trainer, metrics and reporting.

- HopRecord: what happened while training one hop
- HopResult: the F1 matrix over every test set after one hop
- RunSummary: the aggregated sequence metrics of a run
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from config import SUMMARY_DECIMALS, SUMMARY_SCALE

from .errors import MetricsError
from .sequence import Combo


@dataclass
class HopRecord:
    """Log entry for a single fine-tuning hop."""
    hop: int
    combo: Combo
    method: str
    chosen_epoch: int
    validation_f1: float
    checkpoint_path: Optional[str] = None
    epoch_f1: List[float] = field(default_factory=list)
    train_size: int = 0
    seed: int = 0
    collapsed: bool = False
    majority_fraction: float = 0.0

    def to_dict(self) -> dict:
        return {
            "hop": self.hop,
            "lang": self.combo.lang,
            "category": self.combo.category,
            "method": self.method,
            "chosen_epoch": self.chosen_epoch,
            "validation_f1": self.validation_f1,
            "checkpoint_path": self.checkpoint_path,
            "epoch_f1": list(self.epoch_f1),
            "train_size": self.train_size,
            "seed": self.seed,
            "collapsed": self.collapsed,
            "majority_fraction": self.majority_fraction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "HopRecord":
        return cls(
            hop=data["hop"],
            combo=Combo(data["lang"], data["category"]),
            method=data["method"],
            chosen_epoch=data["chosen_epoch"],
            validation_f1=data["validation_f1"],
            checkpoint_path=data.get("checkpoint_path"),
            epoch_f1=list(data.get("epoch_f1", [])),
            train_size=data.get("train_size", 0),
            seed=data.get("seed", 0),
            collapsed=data.get("collapsed", False),
            majority_fraction=data.get("majority_fraction", 0.0),
        )


@dataclass
class HopResult:
    """F1 over every (language, category) test set after hop `hop`."""
    hop: int
    train_combo: Optional[Combo]  # None for the pre-fine-tuning evaluation
    f1: List[List[float]]  # f1[lang][category]
    predicted_positive: int = 0
    predicted_total: int = 0

    @property
    def num_langs(self) -> int:
        return len(self.f1)

    @property
    def num_categories(self) -> int:
        return len(self.f1[0]) if self.f1 else 0

    def validate(self) -> None:
        if not self.f1 or not self.f1[0]:
            raise MetricsError(f"hop {self.hop}: empty F1 matrix")
        width = len(self.f1[0])
        for row in self.f1:
            if len(row) != width:
                raise MetricsError(f"hop {self.hop}: ragged F1 matrix")
            for value in row:
                if not 0.0 <= value <= 1.0:
                    raise MetricsError(f"hop {self.hop}: F1 value {value} outside [0, 1]")

    def majority_fraction(self) -> float:
        if self.predicted_total == 0:
            return 0.0
        positive = self.predicted_positive / self.predicted_total
        return max(positive, 1.0 - positive)


@dataclass
class RunSummary:
    """Sequence-level metrics as fractions in [0, 1]; None where undefined."""
    overall_f1: float
    il_id: Optional[float]
    ol_od: Optional[float]
    il_od: Optional[float]
    ol_id: Optional[float]
    f_lang: float
    f_categ: float
    hops: int = 0
    collapsed_hops: List[int] = field(default_factory=list)

    COLUMNS = ("Overall F1", "IL/ID", "OL/OD", "IL/OD", "OL/ID", "F-lang", "F-categ")

    def values(self) -> List[Optional[float]]:
        return [self.overall_f1, self.il_id, self.ol_od, self.il_od, self.ol_id, self.f_lang, self.f_categ]

    def scaled(self) -> Dict[str, Optional[float]]:
        """Values x100, rounded to two decimals, keyed by column title."""
        return {
            col: None if v is None else round(v * SUMMARY_SCALE, SUMMARY_DECIMALS)
            for col, v in zip(self.COLUMNS, self.values())
        }

    def formatted(self) -> Dict[str, str]:
        return {
            col: "n/a" if v is None else f"{v * SUMMARY_SCALE:.{SUMMARY_DECIMALS}f}"
            for col, v in zip(self.COLUMNS, self.values())
        }

    def to_dict(self) -> dict:
        return {
            "overall_f1": self.overall_f1,
            "il_id": self.il_id,
            "ol_od": self.ol_od,
            "il_od": self.il_od,
            "ol_id": self.ol_id,
            "f_lang": self.f_lang,
            "f_categ": self.f_categ,
            "hops": self.hops,
            "collapsed_hops": list(self.collapsed_hops),
            "scaled": self.formatted(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunSummary":
        return cls(**{k: data[k] for k in (
            "overall_f1", "il_id", "ol_od", "il_od", "ol_id", "f_lang", "f_categ")},
            hops=data.get("hops", 0), collapsed_hops=list(data.get("collapsed_hops", [])))
