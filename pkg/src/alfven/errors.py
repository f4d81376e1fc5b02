"""Exception types shared across the package."""

from __future__ import annotations


class AlfvenError(Exception):
    """Base class for all package-specific errors."""


class MarginViolation(AlfvenError):
    """Initial data support plus planned run distance does not fit in the box."""


class DomainExhaustion(AlfvenError):
    """Tracked wave-packet support reached the periodic wrap boundary."""


class BlowupDetected(AlfvenError):
    """max|z| exceeded the configured cap; the small-data regime was left."""


class InsufficientHistory(AlfvenError):
    """Not enough recorded checkpoints for the requested comparison."""


class ConfigError(AlfvenError):
    """Invalid experiment configuration.

    Carries the full list of problems found, not just the first one.
    Each entry is a (kind, message) pair with kind in
    {"MissingKey", "RangeError", "MarginViolation", "BadValue"}.
    """

    def __init__(self, problems: list[tuple[str, str]]):
        self.problems = list(problems)
        lines = [f"{kind}: {msg}" for kind, msg in self.problems]
        super().__init__("invalid configuration:\n  " + "\n  ".join(lines))
