"""Tests for run configuration files, overrides, snapshots and environment overrides."""

import pytest

from config import CONFIG_DEFAULTS
from environment import environment_overrides, get_eval_workers, get_log_level
from seqft.errors import ConfigError
from seqft.run_config import RunConfig, parse_assignment, parse_config_text

from conftest import TINY_OVERRIDES


def test_defaults_validate():
    config = RunConfig.load()
    assert config.values == CONFIG_DEFAULTS
    assert config.method.value == "seqft-trans-llrd"


def test_config_text_parsing():
    text = """
    # quick run
    train.epochs = 3
    train.base_lr = 1e-4   # inline comment
    augment.stratified = yes
    corpus.seed = none
    sequence.file = seqs/S1.txt
    """
    parsed = parse_config_text(text)
    assert parsed == {"train.epochs": 3, "train.base_lr": 1e-4, "augment.stratified": True,
                      "corpus.seed": None, "sequence.file": "seqs/S1.txt"}


@pytest.mark.parametrize("text, key, line_no", [
    ("train.epochs = 3\nnot an assignment\n", None, 2),
    ("train.epochs = 3\ntrain.momentum = 0.9\n", "train.momentum", 2),
    ("train.epochs = three\n", "train.epochs", 1),
    ("seed = 1\n\nseed = 2\n", "seed", 3),
    ("augment.stratified = maybe\n", "augment.stratified", 1),
])
def test_config_errors_name_key_and_line(text, key, line_no):
    with pytest.raises(ConfigError) as exc:
        parse_config_text(text)
    assert exc.value.key == key
    assert exc.value.line_no == line_no


def test_out_of_range_zeta_rejected():
    with pytest.raises(ConfigError) as exc:
        RunConfig.load(overrides=["train.zeta=1.3"])
    assert exc.value.key == "train.zeta"


@pytest.mark.parametrize("pair", ["method=ewc", "eval.workers=0", "eval.collapse_threshold=0.4",
                                  "sequence.hops=-1", "augment.fraction=2"])
def test_invalid_values_rejected(pair):
    with pytest.raises(ConfigError):
        RunConfig.load(overrides=[pair])


def test_assignment_needs_known_key():
    with pytest.raises(ConfigError):
        parse_assignment("train.epochs")
    with pytest.raises(ConfigError):
        parse_assignment("nope=1")


def test_layering_file_then_set_then_seed(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("train.epochs = 3\nseed = 4\n")
    config = RunConfig.load(str(path), ["train.epochs=7"], seed=9)
    assert config["train.epochs"] == 7
    assert config["seed"] == 9
    assert config.corpus_seed == 9
    assert config.sequence_seed == 9
    assert config.updated(corpus__seed=2).corpus_seed == 2


def test_missing_config_file():
    with pytest.raises(FileNotFoundError):
        RunConfig.load("/nonexistent/run.cfg")


def test_snapshot_reproduces_the_config(tmp_path, tiny_config):
    config = tiny_config.updated(train__zeta=0.75, augment__stratified=True)
    path = str(tmp_path / "config.txt")
    config.write_snapshot(path)
    lines = open(path).read().splitlines()
    assert lines == sorted(lines)
    assert "train.zeta = 0.75" in lines
    assert "corpus.seed = none" in lines
    assert RunConfig.load(path).values == config.values


def test_updated_rejects_unknown_and_invalid_keys(tiny_config):
    with pytest.raises(ConfigError):
        tiny_config.updated(train__momentum=0.9)
    with pytest.raises(ConfigError):
        tiny_config.updated(train__zeta=0.0)


def test_builders(tiny_config):
    assert tiny_config.corpus_spec().pool_per_label == 10
    assert tiny_config.train_config().train_size == 12
    assert tiny_config.model_config(81).num_blocks == 1
    assert tiny_config.corpus_names() == (("de", "en"), ("apparel", "automotive"))
    wide = RunConfig.load(overrides=TINY_OVERRIDES + ["corpus.num_langs=7", "corpus.pool_per_label=10"])
    assert wide.corpus_names()[0][-1] == "lang6"


def test_alignment_reaches_the_model_config(tiny_config):
    aligned = tiny_config.updated(model__alignment=0.9)
    config = aligned.model_config(81, alignment_period=40)
    assert (config.alignment, config.alignment_period) == (0.9, 40)
    with pytest.raises(ConfigError):
        aligned.model_config(81)
    with pytest.raises(ConfigError):
        tiny_config.updated(model__alignment=1.5)
    with pytest.raises(ConfigError):
        tiny_config.updated(model__alignment=0.5, data__marc_path="train.jsonl")


def test_marc_corpus_names_follow_the_configured_counts(tiny_config):
    marc = tiny_config.updated(data__marc_path="train.jsonl", corpus__num_categories=3)
    assert marc.corpus_names() == (("de", "en"), ("apparel", "automotive", "beauty"))


# =============================================================================
# ENVIRONMENT
# =============================================================================

def test_environment_worker_override(monkeypatch):
    monkeypatch.setenv("SEQFT_EVAL_WORKERS", "3")
    assert environment_overrides() == ["eval.workers=3"]
    monkeypatch.setenv("SEQFT_EVAL_WORKERS", "zero")
    assert get_eval_workers() == 1
    monkeypatch.delenv("SEQFT_EVAL_WORKERS")
    assert environment_overrides() == []


def test_environment_log_level(monkeypatch):
    monkeypatch.setenv("SEQFT_LOG_LEVEL", "debug")
    assert get_log_level() == "DEBUG"
    monkeypatch.setenv("SEQFT_LOG_LEVEL", "chatty")
    assert get_log_level() == "INFO"
