"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NotApplicableError(ValueError):
    """A bound was requested outside its validity range.

    ``condition`` names the violated requirement (``"lower"``, ``"upper"``,
    ``"regime"``, ...) and ``threshold`` carries the computed boundary value
    when there is one.
    """

    def __init__(self, message: str, *, condition: str, threshold: float | None = None):
        super().__init__(message)
        self.condition = condition
        self.threshold = threshold


class StateSpaceTooLarge(ValueError):
    """Exact enumeration would visit too many states; use Monte Carlo instead."""
