"""
Hop sequences: ordered lists of distinct (language, category) combinations.

Sampling is a seeded shuffle of every combination followed by truncation,
so no combination repeats while languages and categories individually can.
"""

import logging
import os
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from .errors import SequenceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Combo:
    lang: int
    category: int


@dataclass
class HopSequence:
    combos: List[Combo]
    seed: int
    id: str = "S1"

    def __len__(self) -> int:
        return len(self.combos)

    def __iter__(self):
        return iter(self.combos)


def all_combos(langs: Sequence[int], categories: Sequence[int]) -> List[Combo]:
    return [Combo(lang, cat) for lang in langs for cat in categories]


def build_sequence(langs: Sequence[int], categories: Sequence[int], n_hops: int, seed: int,
                   sequence_id: str = "S1") -> HopSequence:
    combos = all_combos(langs, categories)
    if n_hops < 0:
        raise SequenceError(f"hop count must be non-negative, got {n_hops}")
    if n_hops > len(combos):
        raise SequenceError(
            f"{n_hops} hops requested but only {len(combos)} distinct combinations exist"
        )
    order = np.random.default_rng(seed).permutation(len(combos))
    chosen = [combos[i] for i in order[:n_hops]]
    logger.debug(f"Built sequence {sequence_id} with {n_hops} hops (seed {seed})")
    return HopSequence(chosen, seed, sequence_id)


def check_no_repeats(sequence: HopSequence) -> None:
    seen = set()
    for i, combo in enumerate(sequence.combos, 1):
        if combo in seen:
            raise SequenceError(f"hop {i} repeats combination {combo}")
        seen.add(combo)


# =============================================================================
# SEQUENCE FILES
# =============================================================================
# One combo per line: "hop_index, lang_name, category_name"; '#' lines are
# comments. The header comment carries the sequence id and seed.

def write_sequence_file(path: str, sequence: HopSequence, lang_names: Sequence[str],
                        category_names: Sequence[str]) -> None:
    lines = [f"# sequence {sequence.id} seed {sequence.seed}"]
    for i, combo in enumerate(sequence.combos, 1):
        lines.append(f"{i}, {lang_names[combo.lang]}, {category_names[combo.category]}")
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")


def read_sequence_file(path: str, lang_names: Sequence[str],
                       category_names: Sequence[str]) -> HopSequence:
    if not os.path.exists(path):
        raise FileNotFoundError(f"Sequence file not found: {path}")
    lang_ids = {name: i for i, name in enumerate(lang_names)}
    cat_ids = {name: i for i, name in enumerate(category_names)}
    seq_id, seed = os.path.splitext(os.path.basename(path))[0], 0
    combos = []
    with open(path, "r", encoding="utf-8") as f:
        for line_no, raw in enumerate(f, 1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 4 and parts[0] == "sequence" and parts[2] == "seed":
                    seq_id, seed = parts[1], int(parts[3])
                continue
            fields = [p.strip() for p in line.split(",")]
            if len(fields) != 3:
                raise SequenceError(f"{path}:{line_no}: expected 'hop_index, lang, category'")
            index, lang, cat = fields
            if not index.isdigit() or int(index) != len(combos) + 1:
                raise SequenceError(f"{path}:{line_no}: hop index {index!r} out of order")
            if lang not in lang_ids:
                raise SequenceError(f"{path}:{line_no}: unknown language {lang!r}")
            if cat not in cat_ids:
                raise SequenceError(f"{path}:{line_no}: unknown category {cat!r}")
            combos.append(Combo(lang_ids[lang], cat_ids[cat]))
    sequence = HopSequence(combos, seed, seq_id)
    check_no_repeats(sequence)
    return sequence
