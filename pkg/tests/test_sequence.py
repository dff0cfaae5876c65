"""Tests for hop sequence sampling and sequence files."""

import pytest

from seqft.errors import SequenceError
from seqft.sequence import (
    Combo,
    HopSequence,
    build_sequence,
    check_no_repeats,
    read_sequence_file,
    write_sequence_file,
)

LANGS = ["de", "en", "es", "fr", "ja", "zh"]
CATS = ["apparel", "automotive", "beauty"]


def test_sampled_sequences_never_repeat_a_combination():
    for seed in range(1000):
        seq = build_sequence(range(6), range(10), 50, seed)
        assert len(seq) == 50
        assert len(set(seq.combos)) == 50
        assert len({c.lang for c in seq}) < 50
        assert len({c.category for c in seq}) < 50


def test_sampling_is_seeded():
    assert build_sequence(range(6), range(10), 50, 11).combos == build_sequence(range(6), range(10), 50, 11).combos
    assert build_sequence(range(6), range(10), 50, 11).combos != build_sequence(range(6), range(10), 50, 12).combos


def test_full_length_sequence_is_a_permutation():
    seq = build_sequence(range(2), range(3), 6, seed=0)
    assert sorted(seq.combos) == [Combo(l, c) for l in range(2) for c in range(3)]


def test_empty_sequence_allowed():
    assert len(build_sequence(range(2), range(2), 0, seed=0)) == 0


@pytest.mark.parametrize("hops", [61, -1])
def test_impossible_hop_counts_rejected(hops):
    with pytest.raises(SequenceError):
        build_sequence(range(6), range(10), hops, seed=0)


def test_repeat_detection():
    with pytest.raises(SequenceError):
        check_no_repeats(HopSequence([Combo(0, 1), Combo(1, 1), Combo(0, 1)], seed=0))


def test_sequence_file_round_trip(tmp_path):
    seq = build_sequence(range(6), range(3), 10, seed=5, sequence_id="S2")
    path = str(tmp_path / "seq.txt")
    write_sequence_file(path, seq, LANGS, CATS)
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == "# sequence S2 seed 5"
    assert len(lines) == 11
    loaded = read_sequence_file(path, LANGS, CATS)
    assert (loaded.combos, loaded.seed, loaded.id) == (seq.combos, 5, "S2")


def test_headerless_file_takes_id_from_name(tmp_path):
    path = tmp_path / "S9.txt"
    path.write_text("1, de, beauty\n\n# comment\n2, en, apparel\n")
    seq = read_sequence_file(str(path), LANGS, CATS)
    assert seq.id == "S9"
    assert seq.combos == [Combo(0, 2), Combo(1, 0)]


@pytest.mark.parametrize("body", [
    "1, de\n",
    "2, de, apparel\n",
    "1, xx, apparel\n",
    "1, de, toys\n",
    "1, de, apparel\n2, de, apparel\n",
])
def test_bad_sequence_files_rejected(tmp_path, body):
    path = tmp_path / "bad.txt"
    path.write_text(body)
    with pytest.raises(SequenceError):
        read_sequence_file(str(path), LANGS, CATS)


def test_missing_sequence_file():
    with pytest.raises(FileNotFoundError):
        read_sequence_file("/nonexistent/seq.txt", LANGS, CATS)
