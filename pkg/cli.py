#!/usr/bin/env python
"""
Command-line interface for the sequential fine-tuning lab.

Usage:
    python cli.py gen-corpus --out corpus/ [--config run.cfg] [--seed 3]
    python cli.py build-sequence --out sequence.txt --set sequence.hops=12
    python cli.py run --config run.cfg --out runs/S1 [--resume | --force]
    python cli.py report runs/S1 runs/S2 --out report/ [--overlay runs/S1-seqft]

Key Principle: this is a thin wrapper over the seqft package. No business
logic here - only argument parsing, orchestration and status output.
"""

import argparse
import logging
import os
import sys

from config import LOG_DATE_FORMAT, LOG_FORMAT, PLOT_FILE
from environment import environment_overrides, get_log_level, get_runs_directory, load_environment
from run_logger import RunLogger
from seqft import corpus as corpus_mod
from seqft import report
from seqft.errors import SeqFTError
from seqft.run_config import RunConfig
from seqft.run_store import prepare_output_dir
from seqft.runner import execute_run
from seqft.sequence import Combo, build_sequence, write_sequence_file


def setup_logging(verbose: bool = False):
    """Configure logging based on verbosity level."""
    level = logging.DEBUG if verbose else getattr(logging, get_log_level())
    logging.basicConfig(level=level, format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)


def load_config(args) -> RunConfig:
    return RunConfig.load(args.config, [*environment_overrides(), *args.set], args.seed)


# =============================================================================
# CLI COMMANDS
# =============================================================================

def cmd_gen_corpus(args):
    """Write the deterministic synthetic corpus dump."""
    if not args.out:
        print("[ERROR] gen-corpus needs --out <dir>")
        return 1
    config = load_config(args)
    if config["data.marc_path"] is not None:
        print("[ERROR] gen-corpus writes the synthetic corpus; unset data.marc_path")
        return 1
    prepare_output_dir(args.out, force=args.force)
    print(f"[RUNNING] Generating corpus (seed {config.corpus_seed})")
    corpus = corpus_mod.gen_synthetic_corpus(config.corpus_spec())
    written = corpus_mod.dump_corpus(corpus, args.out)

    combo = Combo(0, 0)
    floor = corpus_mod.bag_of_tokens_f1(corpus.pools[combo], corpus.test_suite[combo])
    print(f"[OK] {len(corpus.lang_names)} languages x {len(corpus.category_names)} categories, "
          f"vocabulary {corpus.vocab_size}")
    print(f"[OK] Bag-of-tokens F1 on {corpus.combo_name(combo)}: {floor:.4f}")
    for path in written:
        print(f"[OUTPUT] {path}")
    return 0


def cmd_build_sequence(args):
    """Sample a hop sequence and write it as a sequence file."""
    config = load_config(args)
    lang_names, category_names = config.corpus_names()
    sequence = build_sequence(list(range(len(lang_names))), list(range(len(category_names))),
                              config["sequence.hops"], config.sequence_seed, config["sequence.id"])
    if not args.out:
        for i, combo in enumerate(sequence.combos, 1):
            print(f"{i}, {lang_names[combo.lang]}, {category_names[combo.category]}")
        return 0
    if os.path.exists(args.out) and not args.force:
        print(f"[ERROR] {args.out} already exists (use --force to overwrite)")
        return 1
    parent = os.path.dirname(os.path.abspath(args.out))
    if not os.path.isdir(parent):
        print(f"[ERROR] Parent directory of {args.out} does not exist")
        return 1
    write_sequence_file(args.out, sequence, lang_names, category_names)
    print(f"[OUTPUT] {len(sequence)} hops written to {args.out}")
    return 0


def cmd_run(args):
    """Run (or resume) a sequential fine-tuning experiment."""
    if args.resume:
        if not args.out:
            print("[ERROR] --resume needs --out <run_dir>")
            return 1
        run_dir, config = args.out, None
    else:
        config = load_config(args)
        run_dir = args.out or os.path.join(
            get_runs_directory(), f"{config['sequence.id']}-{config['method']}-seed{config['seed']}")
        os.makedirs(os.path.dirname(os.path.abspath(run_dir)), exist_ok=True)

    print(f"[RUNNING] {'Resuming' if args.resume else 'Starting'} run in {run_dir}")
    data = execute_run(config, run_dir, force=args.force, resume=args.resume,
                       sinks=[RunLogger(run_dir)])
    if data is None:
        print("[OK] Empty sequence; nothing was trained")
        return 0
    print("")
    print(report.summary_table([(data.name, data.summary)]))
    if data.summary.collapsed_hops:
        print(f"[OK] Collapsed hops: {', '.join(str(h) for h in data.summary.collapsed_hops)}")
    print(f"[OUTPUT] Results saved to: {run_dir}")
    return 0


def cmd_report(args):
    """Combined summary table plus one hop-wise plot per run."""
    runs = [report.load_run(run_dir) for run_dir in args.run_dirs]
    overlay = report.load_run(args.overlay) if args.overlay else None
    table = report.summary_table([(run.name, run.summary) for run in runs])
    print(table)

    out_dir = args.out or "report"
    os.makedirs(out_dir, exist_ok=True)
    report.summary_frame([(run.name, run.summary) for run in runs]).to_csv(
        os.path.join(out_dir, "summary.csv"), index=False, lineterminator="\n")
    with open(os.path.join(out_dir, "summary.txt"), "w", encoding="utf-8", newline="\n") as f:
        f.write(table)
    # Run folders from different parents may share a name; the position keeps plots apart.
    for index, run in enumerate(runs, 1):
        path = os.path.join(out_dir, f"{index:02d}_{run.name}_{PLOT_FILE}")
        report.write_svg(path, report.render_hopwise_svg(run, overlay))
        print(f"[OUTPUT] {path}")
    return 0


COMMANDS = {
    "gen-corpus": cmd_gen_corpus,
    "build-sequence": cmd_build_sequence,
    "run": cmd_run,
    "report": cmd_report,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=str, help="Run configuration file (key = value lines)")
    common.add_argument("--seed", type=int, help="Override the run seed")
    common.add_argument("--out", type=str, help="Output directory or file")
    common.add_argument("--force", action="store_true", help="Overwrite existing output")
    common.add_argument("--resume", action="store_true", help="Continue an interrupted run")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="Override one configuration key (repeatable)")
    common.add_argument("--verbose", "-v", action="store_true", help="Enable debug logging")

    parser = argparse.ArgumentParser(
        description="Translation-augmented sequential fine-tuning lab",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python cli.py gen-corpus --out corpus/
  python cli.py run --set method=seqft-trans-llrd --set train.zeta=0.75 --out runs/S1
  python cli.py run --resume --out runs/S1
  python cli.py report runs/S1 --overlay runs/S1-seqft
        """,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("gen-corpus", parents=[common], help="Write the synthetic corpus")
    sub.add_parser("build-sequence", parents=[common], help="Sample a hop sequence")
    sub.add_parser("run", parents=[common], help="Run a sequence of fine-tuning hops")
    report_parser = sub.add_parser("report", parents=[common], help="Summarise and plot runs")
    report_parser.add_argument("run_dirs", nargs="+", help="Run directories to report on")
    report_parser.add_argument("--overlay", type=str, help="Run drawn translucently beneath each plot")
    return parser


def main(argv=None):
    load_environment()
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return COMMANDS[args.command](args)
    except (SeqFTError, FileNotFoundError) as e:
        print(f"[ERROR] {e}")
        if args.verbose:
            import traceback
            traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
