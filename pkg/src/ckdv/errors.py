"""Exception types shared across the package."""


class CkdvError(Exception):
    """Base class for all solver errors."""


class BlowUpError(CkdvError):
    """The discrete solution left the stable regime.

    Raised when a time layer contains non-finite entries or its max-norm
    exceeds 1e6 times the initial max-norm. ``step`` is the 1-based index
    of the step being computed when the blow-up was detected (``None`` when
    the faulty layer was produced outside a stepping loop).
    """

    def __init__(self, message: str, step: int | None = None, time: float | None = None):
        super().__init__(message)
        self.step = step
        self.time = time


class ConfigError(CkdvError, ValueError):
    """Invalid run configuration.

    ``field`` names the offending key for validation faults; ``line`` is the
    1-based line number for parse faults.
    """

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        super().__init__(message)
        self.field = field
        self.line = line
