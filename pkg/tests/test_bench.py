"""Tests for bench suites: members, suite execution, zeta sweeps."""

import json
import os

import pandas as pd
import pytest

from seqft import bench
from seqft.bench import BenchSuite
from seqft.errors import ConfigError

REPO_ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), ".."))
SMOKE = os.path.join(REPO_ROOT, "bench_suites", "smoke.json")
DESK_DEFAULT = os.path.join(REPO_ROOT, "bench_suites", "desk_default.json")


def read_bytes(path):
    with open(path, "rb") as f:
        return f.read()


def test_suite_members_and_configs():
    suite = BenchSuite.load(SMOKE)
    members = suite.members()
    assert [m.name for m in members] == ["S1-seqft", "S1-seqft-trans-llrd-z0.75"]
    config = suite.member_config(members[1], "/tmp/S1.txt")
    assert config["seed"] == 5
    assert config["corpus.seed"] == 0
    assert config["train.zeta"] == 0.75
    assert config["sequence.file"] == "/tmp/S1.txt"


def test_every_shipped_suite_loads():
    for path in (SMOKE, DESK_DEFAULT):
        assert BenchSuite.load(path).members()


def test_default_suite_knobs_are_frozen():
    suite = BenchSuite.load(DESK_DEFAULT)
    assert [m.name for m in suite.members()][:4] == [
        "S1-seqft", "S1-seqft-llrd-z0.38", "S1-seqft-trans", "S1-seqft-trans-llrd-z0.38"]
    config = suite.base_config()
    assert config["train.base_lr"] == 0.01
    assert config["model.alignment"] == 0.75
    assert (config["data.train_size"], config["corpus.label_noise"]) == (40, 0.1)


def test_unknown_suite_fields_rejected(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"name": "x", "sequences": [], "methods": [], "runs": 3}))
    with pytest.raises(ConfigError):
        BenchSuite.load(str(path))


def test_suite_without_members_rejected(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text(json.dumps({"name": "empty"}))
    with pytest.raises(ConfigError):
        BenchSuite.load(str(path)).members()


@pytest.fixture(scope="module")
def smoke_outputs(tmp_path_factory):
    suite = BenchSuite.load(SMOKE)
    first = str(tmp_path_factory.mktemp("bench_a"))
    second = str(tmp_path_factory.mktemp("bench_b"))
    return suite, first, bench.run_suite(suite, first), second, bench.run_suite(suite, second)


def test_smoke_suite_compares_every_member(smoke_outputs):
    suite, out_dir, result, _, _ = smoke_outputs
    assert result.failures == {}
    assert result.comparison["Run"].tolist() == [m.name for m in suite.members()]
    assert result.comparison["Method"].tolist() == ["seqft", "seqft-trans-llrd"]
    assert os.path.exists(os.path.join(out_dir, "sequences", "S1.txt"))
    on_disk = pd.read_csv(os.path.join(out_dir, "comparison.csv"))
    assert len(on_disk) == 2


def test_members_share_the_pinned_sequence(smoke_outputs):
    _, out_dir, _, _, _ = smoke_outputs
    sequences = [read_bytes(os.path.join(out_dir, "runs", name, "sequence.txt"))
                 for name in ("S1-seqft", "S1-seqft-trans-llrd-z0.75")]
    assert sequences[0] == sequences[1]


def test_suite_execution_is_byte_identical(smoke_outputs):
    suite, first, _, second, _ = smoke_outputs
    for member in suite.members():
        for name in ("metrics.csv", "summary.json", "summary.txt"):
            a = os.path.join(first, "runs", member.name, name)
            b = os.path.join(second, "runs", member.name, name)
            assert read_bytes(a) == read_bytes(b), (member.name, name)
    assert read_bytes(os.path.join(first, "comparison.csv")) == read_bytes(os.path.join(second, "comparison.csv"))
    assert read_bytes(os.path.join(first, "zeta_sweep.csv")) == read_bytes(os.path.join(second, "zeta_sweep.csv"))


def test_zeta_sweep_table(smoke_outputs):
    _, out_dir, result, _, _ = smoke_outputs
    sweep = result.zeta_sweep
    assert list(sweep.columns) == ["language", "0.5", "1"]
    assert sweep["language"].tolist() == ["de", "en", "mean"]
    for col in ("0.5", "1"):
        assert sweep[col].iloc[-1] == pytest.approx(sweep[col].iloc[:-1].mean())
        assert sweep[col].between(0.0, 1.0).all()
    assert os.path.exists(os.path.join(out_dir, "zeta_sweep.txt"))


def test_rerunning_a_finished_suite_skips_members(smoke_outputs):
    suite, out_dir, result, _, _ = smoke_outputs
    before = read_bytes(os.path.join(out_dir, "runs", "S1-seqft", "metrics.csv"))
    again = bench.run_suite(suite, out_dir, with_zeta_sweep=False)
    assert again.comparison.equals(result.comparison)
    assert read_bytes(os.path.join(out_dir, "runs", "S1-seqft", "metrics.csv")) == before


def test_failing_member_does_not_stop_the_suite(tmp_path):
    suite = BenchSuite.load(SMOKE)
    # a non-empty directory without a snapshot cannot be resumed
    broken = tmp_path / "runs" / "S1-seqft"
    broken.mkdir(parents=True)
    (broken / "junk.txt").write_text("x")

    result = bench.run_suite(suite, str(tmp_path), with_zeta_sweep=False)
    assert list(result.failures) == ["S1-seqft"]
    assert result.comparison["Run"].tolist() == ["S1-seqft-trans-llrd-z0.75"]
    with open(tmp_path / "failures.json") as f:
        assert list(json.load(f)) == ["S1-seqft"]


def test_unexpected_error_in_a_member_is_recorded(tmp_path, monkeypatch, caplog):
    real = bench.execute_run

    def flaky(config, run_dir, **kwargs):
        if os.path.basename(run_dir) == "S1-seqft":
            raise RuntimeError("worker blew up")
        return real(config, run_dir, **kwargs)

    monkeypatch.setattr(bench, "execute_run", flaky)
    result = bench.run_suite(BenchSuite.load(SMOKE), str(tmp_path), with_zeta_sweep=False)
    assert result.failures == {"S1-seqft": "RuntimeError: worker blew up"}
    assert result.comparison["Run"].tolist() == ["S1-seqft-trans-llrd-z0.75"]
    with open(tmp_path / "failures.json") as f:
        assert json.load(f) == {"S1-seqft": "RuntimeError: worker blew up"}
    assert "[ERROR] S1-seqft" in caplog.text


def test_zeta_sweep_rejects_unknown_category():
    with pytest.raises(ConfigError):
        bench.run_zeta_sweep(BenchSuite.load(SMOKE).base_config(), "toys", [1.0])


# =============================================================================
# FULL DEFAULT SUITE
# =============================================================================

@pytest.fixture(scope="module")
def default_suite_report(tmp_path_factory):
    suite = BenchSuite.load(DESK_DEFAULT)
    return bench.run_suite(suite, str(tmp_path_factory.mktemp("desk_default")), with_zeta_sweep=False)


def _by(report, method):
    frame = report.comparison
    rows = frame[frame["Method"] == method]
    return {row["Sequence"]: row for _, row in rows.iterrows()}


@pytest.mark.slow
def test_default_suite_completes(default_suite_report):
    assert default_suite_report.failures == {}
    assert len(default_suite_report.comparison) == 12


@pytest.mark.slow
def test_llrd_methods_beat_plain_sequential_fine_tuning(default_suite_report):
    plain, trans = _by(default_suite_report, "seqft"), _by(default_suite_report, "seqft-trans")
    for method in ("seqft-llrd", "seqft-trans-llrd"):
        for seq, row in _by(default_suite_report, method).items():
            assert float(row["Overall F1"]) > float(plain[seq]["Overall F1"])
            assert float(row["Overall F1"]) > float(trans[seq]["Overall F1"])


@pytest.mark.slow
def test_llrd_with_translation_halves_language_forgetting(default_suite_report):
    def mean_f_lang(method):
        rows = _by(default_suite_report, method).values()
        return sum(float(r["F-lang"]) for r in rows) / len(rows)

    assert mean_f_lang("seqft-trans-llrd") * 2 <= mean_f_lang("seqft")


@pytest.mark.slow
def test_collapse_shows_up_only_without_llrd(default_suite_report):
    plain = _by(default_suite_report, "seqft").values()
    llrd = _by(default_suite_report, "seqft-trans-llrd").values()
    assert any(int(r["Collapsed"]) > 0 for r in plain)
    assert all(int(r["Collapsed"]) == 0 for r in llrd)
