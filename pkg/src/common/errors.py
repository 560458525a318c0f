from __future__ import annotations
from typing import Any, Optional, Sequence


class TropicalError(Exception):
    """Base class for every error raised by the library."""


class AlgebraError(TropicalError):
    pass


class BudgetExceeded(TropicalError):
    """A depth, step or node budget ran out.

    `path` holds the positions (or term paths) leading to the point where the
    budget was hit, outermost first.
    """

    def __init__(self, message: str, path: Optional[Sequence[Any]] = None):
        super().__init__(message)
        self.path = tuple(path or ())


class PayoffError(TropicalError):
    pass


class StrategyError(TropicalError):
    pass


class NormalizationError(TropicalError):
    pass


class TermSyntaxError(TropicalError, ValueError):
    pass


class GrammarError(TropicalError, ValueError):
    def __init__(self, message: str, line: Optional[int] = None, source: str = "<grammar>"):
        self.line = line
        self.source = source
        self.reason = message
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class ConfigError(TropicalError, ValueError):
    pass
