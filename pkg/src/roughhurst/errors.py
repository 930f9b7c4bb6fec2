"""Exception types raised by roughhurst.

The CLI maps these onto exit codes: configuration and format problems exit
with 2, degenerate data with 3 and numerical failures with 4.
"""


class RoughHurstError(Exception):
    """Base class for all package errors."""

    exit_code = 4


class DomainError(RoughHurstError, ValueError):
    """A parameter lies outside its admissible range (e.g. H not in (0, 1))."""

    exit_code = 2


class ConfigError(RoughHurstError, ValueError):
    exit_code = 2


class FormatError(RoughHurstError, ValueError):
    """An input file does not follow the dyadic-grid CSV schema."""

    exit_code = 2


class InsufficientResolutionError(RoughHurstError, ValueError):
    """A path is too coarse for the requested estimation level."""

    exit_code = 2

    def __init__(self, message: str, required_level: int):
        super().__init__(message)
        self.required_level = required_level


class InsufficientLevelsError(RoughHurstError, ValueError):
    exit_code = 2


class NumericalError(RoughHurstError, ArithmeticError):
    exit_code = 4


class EmbeddingError(NumericalError):
    """The circulant embedding produced a significantly negative eigenvalue."""

    def __init__(self, message: str, min_eigenvalue: float):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class DegeneratePathError(RoughHurstError, ArithmeticError):
    """All coefficients vanish at some level, so log2 of the norm is undefined."""

    exit_code = 3

    def __init__(self, message: str, level: int):
        super().__init__(message)
        self.level = level


class ConsistencyError(NumericalError):
    """Two evaluation routes of the same quantity disagree (an internal bug)."""


class RateFitError(RoughHurstError, ValueError):
    exit_code = 4
