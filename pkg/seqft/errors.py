"""
Error types for the sequential fine-tuning lab.

Every error raised on purpose by the package derives from SeqFTError, which
itself is a ValueError so callers that only know about ValueError keep
working. Each subclass carries the context it was raised with as attributes.
"""

from typing import Any, Optional


class SeqFTError(ValueError):
    """Base class for all errors raised by the seqft package."""


# ==== NUMERICS ====

class ShapeError(SeqFTError):
    """An op received operands whose shapes do not conform."""

    def __init__(self, op: str, shapes: list, detail: str = ""):
        self.op = op
        self.shapes = [tuple(s) for s in shapes]
        message = f"{op}: incompatible shapes {self.shapes}"
        if detail:
            message += f" ({detail})"
        super().__init__(message)


class NumericOverflowError(SeqFTError):
    """An op produced NaN or Inf from finite inputs."""

    def __init__(self, op: str):
        self.op = op
        super().__init__(f"{op}: non-finite values in output")


class TapeError(SeqFTError):
    """Gradient requested for a value that was not recorded on a tape."""


# ==== CONFIGURATION ====

class ConfigError(SeqFTError):
    def __init__(self, message: str, key: Optional[str] = None, line_no: Optional[int] = None):
        self.key = key
        self.line_no = line_no
        prefix = ""
        if line_no is not None:
            prefix += f"line {line_no}: "
        if key is not None:
            prefix += f"{key}: "
        super().__init__(prefix + message)


# ==== DATA ====

class CorpusError(SeqFTError):
    """Invalid corpus settings or request."""


class PoolExhaustedError(CorpusError):
    def __init__(self, combo: Any, label: int, needed: int, available: int):
        self.combo = combo
        self.label = label
        self.needed = needed
        self.available = available
        super().__init__(
            f"training pool for {combo} has {available} examples of label {label}, "
            f"{needed} needed"
        )


class PrivacyError(CorpusError):
    """Training data of an already-consumed hop was requested again."""

    def __init__(self, combo: Any):
        self.combo = combo
        super().__init__(f"training pool for {combo} was released after its hop")


class MarcFormatError(CorpusError):
    def __init__(self, message: str, line_no: int):
        self.line_no = line_no
        super().__init__(f"line {line_no}: {message}")


class TranslationError(SeqFTError):
    def __init__(self, token: Any, source: str, target: str):
        self.token = token
        self.source = source
        self.target = target
        super().__init__(f"no translation for {token!r} from {source} to {target}")


class SequenceError(SeqFTError):
    """Invalid hop sequence request or sequence file."""


# ==== TRAINING / EVALUATION ====

class TrainingError(SeqFTError):
    """A hop failed; partial results up to the last completed hop are attached."""

    def __init__(self, message: str, hop_index: int, partial_results: Optional[list] = None):
        self.hop_index = hop_index
        self.partial_results = partial_results or []
        super().__init__(f"hop {hop_index}: {message}")


class CheckpointError(SeqFTError):
    """Checkpoint file missing fields or inconsistent with its config."""


class MetricsError(SeqFTError):
    """Results and sequence do not line up, or a metric input is empty."""


# ==== RUN DIRECTORIES ====

class RunDirectoryError(SeqFTError):
    """Output or run directory is missing, occupied, or holds no results."""

    def __init__(self, message: str, path: str):
        self.path = path
        super().__init__(message)
