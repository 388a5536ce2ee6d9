"""Exception hierarchy.

The three families map onto the command-line exit codes: configuration
problems (2), bad or insufficient data (3) and numerical failures (4).
"""


class TwinBeamError(Exception):
    exit_code = 1


class ParameterError(TwinBeamError, ValueError):
    """Invalid model parameter or configuration value."""

    exit_code = 2


class DataError(TwinBeamError, ValueError):
    """Malformed, empty or insufficient shot data."""

    exit_code = 3


class EmptySeriesError(DataError):
    pass


class EmptySelectionError(DataError):
    """A conditioning window retained no shots."""


class NumericalError(TwinBeamError, ArithmeticError):
    exit_code = 4


class OverSubtractionError(NumericalError):
    """Dark-noise correction left a non-positive variance."""


class TruncationError(NumericalError):
    """Probability mass lost to truncation exceeds the allowed budget."""
