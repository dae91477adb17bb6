"""Exception types shared across modules."""

from __future__ import annotations

from typing import Any


class ResourceLimitError(RuntimeError):
    """A size or search budget would be exceeded."""


class BudgetExceeded(ResourceLimitError):
    """Subset search ran out of budget; ``best`` holds the best upper bound found."""

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class NumericError(ArithmeticError):
    """An iterative solver or a numeric sanity check failed."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved
