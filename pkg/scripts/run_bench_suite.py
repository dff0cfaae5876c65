#!/usr/bin/env python3
"""
Bench Suite Runner

Runs every (sequence, method) member of a bench suite into its own run
directory, then writes the comparison table and the zeta sweep. Re-running
the same command skips finished members and resumes interrupted ones.

Usage:
    python scripts/run_bench_suite.py bench_suites/desk_default.json
    python scripts/run_bench_suite.py bench_suites/desk_default.json --workers 4
    python scripts/run_bench_suite.py bench_suites/smoke.json --output-dir logs/bench --no-zeta-sweep
"""

import argparse
import logging
import os
import sys
import time
from datetime import datetime

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from config import LOG_DATE_FORMAT, LOG_FORMAT, SUITE_COMPARISON_TEXT, SUITE_ZETA_SWEEP_TEXT
from environment import get_log_level, load_environment
from run_logger import RunLogger
from seqft.bench import BenchSuite, run_suite
from seqft.errors import SeqFTError


class TeeLogger:
    """Captures console output and writes to both console and file."""

    def __init__(self, filepath, mode='w'):
        self.terminal = sys.stdout
        self.log_file = open(filepath, mode, encoding='utf-8')

    def write(self, message):
        self.terminal.write(message)
        self.log_file.write(message)
        self.log_file.flush()

    def flush(self):
        self.terminal.flush()
        self.log_file.flush()

    def close(self):
        self.log_file.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()


def print_suite(suite):
    members = suite.members()
    print(f"\n📋 {suite.name}")
    if suite.description:
        print(f"   {suite.description}")
    print(f"   {len(suite.sequences)} sequence(s) x {len(suite.methods)} method(s) = {len(members)} runs")
    for member in members:
        print(f"   - {member.name}")


def print_summary_report(report, output_dir, total_time):
    print("\n" + "=" * 80)
    print("BENCH SUMMARY")
    print("=" * 80)
    print(f"Completed runs: {len(report.summaries)}")
    print(f"Failed runs:    {len(report.failures)}")
    print(f"Total time:     {total_time:.1f}s")

    if not report.comparison.empty:
        print("\n" + report.comparison.to_string(index=False))
    if report.failures:
        print("\n❌ Failures:")
        for name, error in sorted(report.failures.items()):
            print(f"   {name}: {error}")
    if report.zeta_sweep is not None:
        print(f"\nZeta sweep written to {os.path.join(output_dir, SUITE_ZETA_SWEEP_TEXT)}")

    print("\n" + "=" * 80)
    print(f"📁 Comparison table: {os.path.join(output_dir, SUITE_COMPARISON_TEXT)}")
    print("=" * 80)


def main():
    parser = argparse.ArgumentParser(description='Run a sequential fine-tuning bench suite')
    parser.add_argument('suite', help='Suite definition file (JSON)')
    parser.add_argument('--output-dir', default='logs/bench', help='Parent directory for suite outputs')
    parser.add_argument('--workers', type=int, default=1, help='Suite members run in parallel (default: 1)')
    parser.add_argument('--no-zeta-sweep', action='store_true', help='Skip the zeta sweep')
    parser.add_argument('--list', action='store_true', help='List the suite members and exit')
    parser.add_argument('--verbose', '-v', action='store_true', help='Enable debug logging')
    args = parser.parse_args()

    load_environment()
    logging.basicConfig(level=logging.DEBUG if args.verbose else getattr(logging, get_log_level()),
                        format=LOG_FORMAT, datefmt=LOG_DATE_FORMAT)

    try:
        suite = BenchSuite.load(args.suite)
    except (SeqFTError, FileNotFoundError) as e:
        print(f"[ERROR] {e}")
        return 1

    if args.list:
        print_suite(suite)
        return 0

    # One directory per suite file so reruns resume instead of starting over
    output_dir = os.path.join(args.output_dir, os.path.splitext(os.path.basename(args.suite))[0])
    os.makedirs(output_dir, exist_ok=True)
    timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
    console_log_path = os.path.join(output_dir, f"console_log_{timestamp}.md")

    with TeeLogger(console_log_path) as tee:
        original_stdout = sys.stdout
        sys.stdout = tee
        try:
            print(f"# Bench Suite Console Log")
            print(f"**Timestamp:** {timestamp}")
            print(f"**Suite:** {args.suite}")
            print(f"**Output Directory:** {output_dir}")
            print(f"**Workers:** {args.workers}")
            print(f"\n{'=' * 80}\n")
            print_suite(suite)
            print("\n🚀 Starting bench suite...")

            start = time.time()
            try:
                report = run_suite(suite, output_dir, workers=args.workers, sink_factory=RunLogger,
                                   with_zeta_sweep=not args.no_zeta_sweep)
            except KeyboardInterrupt:
                print("\n\n⚠️  Suite interrupted by user; rerun the same command to resume")
                return 1
            except SeqFTError as e:
                print(f"[ERROR] {e}")
                return 1
            print_summary_report(report, output_dir, time.time() - start)
            print(f"\n📝 Full console log saved to: {console_log_path}")
            return 1 if report.failures else 0
        finally:
            sys.stdout = original_stdout


if __name__ == "__main__":
    sys.exit(main())
