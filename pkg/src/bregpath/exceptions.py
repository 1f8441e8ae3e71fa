"""Package-level error types."""

from __future__ import annotations

__all__ = ["DivergenceError", "ConvergenceError"]


class DivergenceError(RuntimeError):
    """Iterates became non-finite.

    Carries the iteration at which the blow-up was detected and, when
    raised from a path run, the partial path of checkpoints recorded
    before that iteration.
    """

    def __init__(self, message: str, iteration: int | None = None, path=None):
        super().__init__(message)
        self.iteration = iteration
        self.path = path


class ConvergenceError(RuntimeError):
    """An inner optimizer failed to reach its tolerance.

    ``grad_norm`` holds the final gradient infinity norm.
    """

    def __init__(self, message: str, grad_norm: float | None = None):
        super().__init__(message)
        self.grad_norm = grad_norm
