"""
Run configuration: `key = value` files layered over CONFIG_DEFAULTS.

Values are typed from their default; every resolved key is written back to
the run directory so a run can be reproduced from its snapshot alone.
"""

import os
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Tuple

from config import CATEGORY_NAMES, CONFIG_DEFAULTS, LANGUAGE_NAMES, PATH_KEYS

from .augment import AugmentConfig
from .corpus import CorpusSpec, default_names
from .errors import ConfigError
from .model import ModelConfig
from .trainer import Method, TrainConfig

_TRUE = ("true", "1", "yes")
_FALSE = ("false", "0", "no")


def parse_value(key: str, raw: str, line_no: Optional[int] = None) -> Any:
    default = CONFIG_DEFAULTS[key]
    text = raw.strip()
    try:
        if default is None:
            if text.lower() == "none" or text == "":
                return None
            return text if key in PATH_KEYS else int(text)
        if isinstance(default, bool):
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse {text!r} as {type(default).__name__ if default is not None else 'int'}",
                          key=key, line_no=line_no) from None
    return text


def format_value(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def parse_config_text(text: str) -> Dict[str, Any]:
    """Overrides from `key = value` lines; '#' starts a comment."""
    overrides: Dict[str, Any] = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line_no=line_no)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in CONFIG_DEFAULTS:
            raise ConfigError("unknown key", key=key, line_no=line_no)
        if key in overrides:
            raise ConfigError("duplicate key", key=key, line_no=line_no)
        overrides[key] = parse_value(key, value, line_no)
    return overrides


def parse_assignment(text: str) -> Dict[str, Any]:
    """One `key=value` command-line override."""
    if "=" not in text:
        raise ConfigError(f"expected key=value, got {text!r}")
    key, value = (part.strip() for part in text.split("=", 1))
    if key not in CONFIG_DEFAULTS:
        raise ConfigError("unknown key", key=key)
    return {key: parse_value(key, value)}


@dataclass
class RunConfig:
    values: Dict[str, Any] = field(default_factory=lambda: dict(CONFIG_DEFAULTS))

    @classmethod
    def load(cls, path: Optional[str] = None, overrides: Iterable[str] = (),
             seed: Optional[int] = None) -> "RunConfig":
        """Defaults, then the config file, then --set pairs, then --seed."""
        config = cls()
        if path is not None:
            if not os.path.exists(path):
                raise FileNotFoundError(f"Config file not found: {path}")
            with open(path, "r", encoding="utf-8") as f:
                config.values.update(parse_config_text(f.read()))
        for item in overrides:
            config.values.update(parse_assignment(item))
        if seed is not None:
            config.values["seed"] = int(seed)
        config.validate()
        return config

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def updated(self, **overrides: Any) -> "RunConfig":
        """Copy with dotted keys given as keyword names using '__' for '.'."""
        values = dict(self.values)
        for name, value in overrides.items():
            key = name.replace("__", ".")
            if key not in CONFIG_DEFAULTS:
                raise ConfigError("unknown key", key=key)
            values[key] = value
        config = RunConfig(values)
        config.validate()
        return config

    @property
    def method(self) -> Method:
        return Method.parse(self["method"])

    @property
    def corpus_seed(self) -> int:
        return self["seed"] if self["corpus.seed"] is None else self["corpus.seed"]

    @property
    def sequence_seed(self) -> int:
        return self["seed"] if self["sequence.seed"] is None else self["sequence.seed"]

    def validate(self) -> None:
        Method.parse(self["method"])
        self.train_config().validate()
        self.augment_config()
        if self["data.marc_path"] is None:
            self.corpus_spec().validate()
        if self["sequence.hops"] < 0:
            raise ConfigError(f"must be non-negative, got {self['sequence.hops']}", key="sequence.hops")
        if self["eval.workers"] < 1:
            raise ConfigError(f"must be positive, got {self['eval.workers']}", key="eval.workers")
        if not 0.5 < self["eval.collapse_threshold"] <= 1.0:
            raise ConfigError(f"must be in (0.5, 1], got {self['eval.collapse_threshold']}",
                              key="eval.collapse_threshold")
        if not 0.0 <= self["model.alignment"] <= 1.0:
            raise ConfigError(f"must be in [0, 1], got {self['model.alignment']}", key="model.alignment")
        if self["model.alignment"] > 0.0 and self["data.marc_path"] is not None:
            raise ConfigError("hashed MARC tokens have no translation-equivalent ids to align",
                              key="model.alignment")
        if self["seed"] < 0:
            raise ConfigError(f"must be non-negative, got {self['seed']}", key="seed")

    # ---- builders ----------------------------------------------------------

    def corpus_spec(self) -> CorpusSpec:
        return CorpusSpec(
            num_langs=self["corpus.num_langs"],
            num_categories=self["corpus.num_categories"],
            tokens_per_lang=self["corpus.tokens_per_lang"],
            sentiment_tokens=self["corpus.sentiment_tokens"],
            topic_tokens=self["corpus.topic_tokens"],
            min_len=self["corpus.min_len"],
            max_len=self["corpus.max_len"],
            pool_per_label=self["corpus.pool_per_label"],
            train_size=self["data.train_size"],
            test_size=self["data.test_size"],
            label_noise=self["corpus.label_noise"],
            seed=self.corpus_seed,
        )

    def model_config(self, vocab_size: int, alignment_period: int = 0) -> ModelConfig:
        """alignment_period is the number of token ids per language, 0 for hashed vocabularies."""
        config = ModelConfig(
            vocab_size=vocab_size,
            embed_dim=self["model.embed_dim"],
            num_blocks=self["model.num_blocks"],
            num_heads=self["model.num_heads"],
            ffn_dim=self["model.ffn_dim"],
            max_seq_len=self["model.max_seq_len"],
            alignment=self["model.alignment"],
            alignment_period=alignment_period,
        )
        config.validate()
        return config

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self["train.epochs"],
            base_lr=self["train.base_lr"],
            zeta=self["train.zeta"],
            batch_size=self["train.batch_size"],
            validation_fraction=self["train.validation_fraction"],
            optimizer=self["train.optimizer"],
            weight_decay=self["train.weight_decay"],
            train_size=self["data.train_size"],
            seed=self["seed"],
        )

    def augment_config(self) -> AugmentConfig:
        return AugmentConfig(fraction=self["augment.fraction"], stratified=self["augment.stratified"])

    # ---- snapshot ----------------------------------------------------------

    def snapshot_text(self) -> str:
        return "".join(f"{key} = {format_value(self.values[key])}\n" for key in sorted(self.values))

    def write_snapshot(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(self.snapshot_text())

    def corpus_names(self) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
        """Language and category names of the corpus this config describes, MARC or synthetic."""
        return (default_names(self["corpus.num_langs"], LANGUAGE_NAMES, "lang"),
                default_names(self["corpus.num_categories"], CATEGORY_NAMES, "cat"))
