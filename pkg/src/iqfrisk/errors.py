"""Exception types shared across the package."""

from __future__ import annotations

from typing import Callable, TypeVar

_R = TypeVar("_R")


class ValidationError(ValueError):
    """Input violates a documented precondition."""


class SolverError(RuntimeError):
    """A sub-solver did not return an optimal point."""

    def __init__(self, what: str, status, message: str = ""):
        self.what = what
        self.status = status
        super().__init__(f"{what}: solver returned {getattr(status, 'value', status)}"
                         + (f" ({message})" if message else ""))


def tagged(tag: str, fn: Callable[[], _R]) -> _R:
    """Run ``fn``, prefixing any validation or solver error with ``[tag]``."""
    try:
        return fn()
    except SolverError as exc:
        raise SolverError(f"[{tag}] {exc.what}", exc.status, str(exc)) from exc
    except ValidationError as exc:
        raise ValidationError(f"[{tag}] {exc}") from exc
