"""
errors module - Exception hierarchy for pairwise-graphlimit

Every exception raised deliberately by the package derives from GraphLimitError.
Contract-style failures additionally derive from ValueError so that callers catching
ValueError keep working.

This module is licensed under the MIT License.
"""


class GraphLimitError(Exception):
    """Base class of all package errors."""


class DomainError(GraphLimitError, ValueError):
    """Input outside the mathematical domain of a function (e.g. non-finite vectors)."""


class ContractError(GraphLimitError, ValueError):
    """Arguments violate a documented contract (shapes, resolutions, ranges, constants)."""


class PreconditionError(ContractError):
    """A documented precondition of an operation does not hold."""


class CapacityError(ContractError):
    """A problem is too large for the exact algorithm requested."""


class CollapseError(GraphLimitError):
    """
    A mass became non-positive during time marching.

    Attributes:
        index: Flat index of the first offending particle or cell
        time: Time at which the collapse was detected
    """

    def __init__(self, index: int, time: float, value: float) -> None:
        self.index = index
        self.time = time
        self.value = value
        super().__init__(f"mass of index {index} became non-positive ({value:.3e}) at t={time:.6g}")


class SolverError(GraphLimitError):
    """
    An iterative solver failed to converge.

    Attributes:
        window_start: Start time of the failing window (None for outer iterations)
        window: Length of the failing window (None for outer iterations)
    """

    def __init__(self, message: str, *, window_start: float | None = None, window: float | None = None) -> None:
        self.window_start = window_start
        self.window = window
        if window_start is not None and window is not None:
            message = f"{message} (window [{window_start:.6g}, {window_start + window:.6g}])"
        super().__init__(message)


class WindowTooLongError(SolverError):
    """A Picard mass iterate left its admissible envelope; the window must be shortened."""


class QuadratureError(GraphLimitError):
    """Cell quadrature did not pass its refinement check."""


class InvariantViolation(GraphLimitError):
    """A monitored invariant failed during a study."""


class ConfigError(GraphLimitError, ValueError):
    """
    Invalid configuration.

    Attributes:
        line: 1-based line number in the configuration file, or None
    """

    def __init__(self, message: str, *, line: int | None = None) -> None:
        self.line = line
        self.reason = message
        super().__init__(f"line {line}: {message}" if line is not None else message)
