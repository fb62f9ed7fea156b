"""Exception types shared across the solver modules.

The CLI maps these onto exit codes: CounterexampleRegimeError -> 2, every
other solver failure -> 1, malformed input -> 64.
"""


class AhcurvError(Exception):
    """Base class for all solver failures."""


class CoarseGridError(AhcurvError):
    """Grid spacing violates the discrete maximum principle requirement."""


class BarrierError(AhcurvError):
    """No admissible sub/super-solution barrier could be constructed."""


class BracketError(AhcurvError):
    """Monotone iterates left the sub/super-solution bracket beyond slack."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class IterationLimitError(AhcurvError):
    """Monotone iteration did not reach the tolerance within max_iter."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class CounterexampleRegimeError(AhcurvError):
    """Horizon data in the regime where no solution is guaranteed to exist
    (epsilon*tau = -1 with a non positive-Yamabe inner boundary)."""
