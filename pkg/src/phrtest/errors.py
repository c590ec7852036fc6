"""Exception hierarchy.

Two families matter to callers: bad input (``InputError``) and numerical
degeneracy (``DegenerateError``). The CLI maps them to exit codes 2 and 3.
"""


class PhrError(Exception):
    """Base class for all package errors."""


class InputError(PhrError, ValueError):
    """Invalid argument, malformed file, or violated precondition."""


class DegenerateError(PhrError, ArithmeticError):
    """A computation hit a numerically degenerate case."""


class DegenerateSpectrumError(DegenerateError):
    def __init__(self, frequency: int, value: float, threshold: float) -> None:
        self.frequency = frequency
        self.value = value
        self.threshold = threshold
        super().__init__(
            f"spectrum estimate at frequency index k={frequency} is {value:.3e}, "
            f"below the normalization threshold {threshold:.3e}"
        )


class DegenerateVarianceError(DegenerateError):
    """Long-run or sample variance is zero (e.g. a constant series)."""


class DegenerateWindowError(DegenerateError):
    """A rolling window has (near-)zero standard deviation."""


class SimulationError(PhrError):
    """Too many replications failed inside a Monte Carlo scenario."""

    def __init__(self, message: str, failures: dict[str, int] | None = None) -> None:
        super().__init__(message)
        self.failures = failures or {}
