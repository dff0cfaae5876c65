#!/usr/bin/env python3
"""
Generate a small MARC-format sample (train, test and translation memory).

The files follow the MARC JSON Lines layout (review_body, stars, language,
product_category) so the real-data code path can be exercised without the
full dataset. Review text is built from per-language word lists; the
translation memory maps every training review into every other language.

Usage:
    python scripts/generate_marc_sample.py --out data/marc_sample
    python scripts/generate_marc_sample.py --out data/marc_sample --per-star 40 --seed 7
"""

import argparse
import json
import os
import sys

import numpy as np

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from config import CATEGORY_NAMES, LANGUAGE_NAMES

POSITIVE_WORDS = 8
NEGATIVE_WORDS = 8
TOPIC_WORDS = 4
FILLER_WORDS = 20


def review_words(rng, stars, category, length):
    """Language-neutral word keys for one review; rendered per language later."""
    if stars >= 4:
        major, minor = "pos", "neg"
    elif stars <= 2:
        major, minor = "neg", "pos"
    else:
        major, minor = ("pos", "neg") if rng.random() < 0.5 else ("neg", "pos")
    keys = [f"{major}{rng.integers(POSITIVE_WORDS)}" for _ in range(2)]
    keys.append(f"{minor}{rng.integers(NEGATIVE_WORDS)}")
    keys.append(f"{CATEGORY_NAMES[category][:4]}{rng.integers(TOPIC_WORDS)}")
    keys += [f"w{rng.integers(FILLER_WORDS)}" for _ in range(length - len(keys))]
    return [keys[int(i)] for i in rng.permutation(len(keys))]


def render(keys, lang):
    return " ".join(f"{LANGUAGE_NAMES[lang]}{key}" for key in keys)


def generate_split(rng, per_star):
    """(records, word keys) for every language x category x star rating."""
    records, keys = [], []
    for lang in range(len(LANGUAGE_NAMES)):
        for cat in range(len(CATEGORY_NAMES)):
            for stars in (1, 2, 3, 4, 5):
                for _ in range(per_star):
                    words = review_words(rng, stars, cat, int(rng.integers(6, 12)))
                    records.append({
                        "review_body": render(words, lang),
                        "stars": stars,
                        "language": LANGUAGE_NAMES[lang],
                        "product_category": CATEGORY_NAMES[cat],
                    })
                    keys.append((lang, words))
    return records, keys


def write_jsonl(path, rows):
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + "\n")


def main():
    parser = argparse.ArgumentParser(description='Generate a MARC-format sample corpus')
    parser.add_argument('--out', default='data/marc_sample', help='Output directory')
    parser.add_argument('--per-star', type=int, default=30,
                        help='Reviews per (language, category, star rating)')
    parser.add_argument('--seed', type=int, default=0, help='Random seed')
    args = parser.parse_args()

    os.makedirs(args.out, exist_ok=True)
    rng = np.random.default_rng(args.seed)

    print("=" * 70)
    print("GENERATING MARC SAMPLE")
    print("=" * 70)

    print("\n[1/3] Generating training reviews...")
    train, train_keys = generate_split(rng, args.per_star)
    write_jsonl(os.path.join(args.out, "train.jsonl"), train)
    print(f"✓ Created {args.out}/train.jsonl ({len(train)} reviews)")

    print("\n[2/3] Generating test reviews...")
    test, _ = generate_split(rng, args.per_star)
    write_jsonl(os.path.join(args.out, "test.jsonl"), test)
    print(f"✓ Created {args.out}/test.jsonl ({len(test)} reviews)")

    print("\n[3/3] Generating translation memory...")
    memory = [
        {"lang_from": LANGUAGE_NAMES[lang], "lang_to": LANGUAGE_NAMES[target],
         "source_text": render(words, lang), "target_text": render(words, target)}
        for lang, words in train_keys
        for target in range(len(LANGUAGE_NAMES)) if target != lang
    ]
    write_jsonl(os.path.join(args.out, "translations.jsonl"), memory)
    print(f"✓ Created {args.out}/translations.jsonl ({len(memory)} translations)")

    print("\nUse with:")
    print(f"  python cli.py run --set data.marc_path={args.out}/train.jsonl "
          f"--set data.marc_test_path={args.out}/test.jsonl "
          f"--set data.translation_memory={args.out}/translations.jsonl")


if __name__ == "__main__":
    main()
