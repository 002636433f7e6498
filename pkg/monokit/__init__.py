import logging
import os
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from typing import Any, Tuple

# =============================================================================
#  Enums and data structures
# =============================================================================

class Verdict(IntEnum):
    PASSED = 0
    REFUTED = 1
    UNDECIDED = 2

class ExitStatus(IntEnum):
    PASSED = 0
    REFUTED = 1
    UNDECIDED = 2
    USAGE_ERROR = 3

class WordVerdict(str, Enum):
    TRIVIAL = "trivial"
    NON_TRIVIAL = "non-trivial"
    UNDECIDED = "undecided"

class EngineKind(str, Enum):
    FREE = "free"
    ENUMERATED = "enumerated"
    UNDECIDED = "undecided"

@dataclass(frozen=True)
class Violation:
    kind: str
    witness: Tuple[Any, ...]
    detail: str = ""

@dataclass(frozen=True)
class ValidationReport:
    violations: Tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def ok(self) -> bool:
        return not self.violations

    def of_kind(self, kind: str) -> Tuple[Violation, ...]:
        return tuple(v for v in self.violations if v.kind == kind)

def combine_verdicts(*verdicts: Verdict) -> Verdict:
    """REFUTED beats UNDECIDED beats PASSED."""
    if any(v == Verdict.REFUTED for v in verdicts):
        return Verdict.REFUTED
    if any(v == Verdict.UNDECIDED for v in verdicts):
        return Verdict.UNDECIDED
    return Verdict.PASSED

# =============================================================================
#  Exceptions
# =============================================================================

class MonokitError(ValueError):
    """Base class for every error raised by monokit."""

class GroupoidError(MonokitError):
    pass

class WordError(MonokitError):
    pass

class PresentationError(MonokitError):
    pass

class TopologyError(MonokitError):
    pass

class TopologySizeError(TopologyError):
    pass

class TrivializationError(MonokitError):
    pass

class CompatibilityError(TrivializationError):
    def __init__(self, message: str, witness: Tuple[Any, ...] = ()):
        super().__init__(message)
        self.witness = witness

class GlobalizationError(MonokitError):
    pass

class DocumentError(MonokitError):
    pass

# =============================================================================
# Helper: logger factory
# =============================================================================
def get_logger(name: str) -> logging.Logger:
    """Return a logger with the given name, configured if not already."""
    logger = logging.getLogger(name)
    if not logger.handlers:
        from monokit.frontend.constants import LOG_LEVEL
        level = os.environ.get("MONOKIT_LOG_LEVEL", LOG_LEVEL).upper()
        logger.setLevel(level)
        ch = logging.StreamHandler()
        ch.setLevel(logging.DEBUG)
        formatter = logging.Formatter(
            "[%(asctime)s] [%(name)s] [%(levelname)s] %(message)s"
        )
        ch.setFormatter(formatter)
        logger.addHandler(ch)
    return logger


def set_log_level(level: str):
    """Apply ``level`` to every monokit logger, present and future."""
    os.environ["MONOKIT_LOG_LEVEL"] = level
    for name, logger in logging.root.manager.loggerDict.items():
        if name.startswith("monokit") and isinstance(logger, logging.Logger):
            logger.setLevel(level)
