"""
Environment Configuration Utility

This module reads process-level settings (log level, runs directory,
evaluation workers) from environment variables. A `.env` file in the working
directory is loaded first, so local overrides do not need to be exported.
"""
import logging
import os

from dotenv import load_dotenv

from config import (
    DEFAULT_EVAL_WORKERS,
    DEFAULT_LOG_LEVEL,
    DEFAULT_RUNS_DIR,
    ENV_EVAL_WORKERS,
    ENV_LOG_LEVEL,
    ENV_RUNS_DIR,
)

logger = logging.getLogger(__name__)

_LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def load_environment() -> None:
    """Load `.env` without overriding variables that are already set."""
    load_dotenv(override=False)


def get_log_level() -> str:
    """
    Logging level name.

    Priority:
    1. Environment variable SEQFT_LOG_LEVEL
    2. DEFAULT_LOG_LEVEL from config.py
    """
    level = os.getenv(ENV_LOG_LEVEL, DEFAULT_LOG_LEVEL).upper()
    if level not in _LOG_LEVELS:
        logger.warning(f"Invalid {ENV_LOG_LEVEL} '{level}', defaulting to '{DEFAULT_LOG_LEVEL}'")
        level = DEFAULT_LOG_LEVEL
    return level


def get_runs_directory() -> str:
    """Directory that relative run names are resolved against."""
    return os.getenv(ENV_RUNS_DIR, DEFAULT_RUNS_DIR)


def get_eval_workers() -> int:
    """Threads used to score test sets concurrently (1 = sequential)."""
    raw = os.getenv(ENV_EVAL_WORKERS)
    if raw is None:
        return DEFAULT_EVAL_WORKERS
    try:
        workers = int(raw)
    except ValueError:
        workers = 0
    if workers < 1:
        logger.warning(f"Invalid {ENV_EVAL_WORKERS} '{raw}', defaulting to {DEFAULT_EVAL_WORKERS}")
        return DEFAULT_EVAL_WORKERS
    return workers


def environment_overrides() -> list:
    """`--set` style overrides implied by the environment."""
    if os.getenv(ENV_EVAL_WORKERS) is None:
        return []
    return [f"eval.workers={get_eval_workers()}"]
