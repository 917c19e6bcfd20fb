"""Exception types shared across the package."""


class EntropyKitError(Exception):
    """Base class for all entropykit errors."""


class SampleTooSmall(EntropyKitError):
    """Nearest-neighbor statistics need at least two points."""


class DuplicatePoints(EntropyKitError):
    """Two sample points coincide exactly, making ln R undefined.

    Continuous densities produce distinct points almost surely, so an exact
    tie signals discrete or corrupted input. The offending index pair is
    available as ``pair``.
    """

    def __init__(self, i, j, message=None):
        self.pair = (int(i), int(j))
        super().__init__(message or f"points {i} and {j} coincide exactly")


class DimensionMismatch(EntropyKitError):
    """Input dimension differs from what the operation requires."""


class InvalidDimension(EntropyKitError):
    """Dimension must be a positive integer."""


class PrecisionUnachievable(EntropyKitError):
    """A Monte Carlo estimate could not reach the requested standard error
    within its draw budget."""


class EmptyInput(EntropyKitError):
    """An aggregation was asked to summarize nothing."""


class ConfigError(EntropyKitError):
    """A distribution or experiment configuration failed validation."""


class CsvFormatError(EntropyKitError):
    """A CSV input file is malformed; ``line`` is the 1-based offender."""

    def __init__(self, line, message):
        self.line = int(line)
        super().__init__(f"line {line}: {message}")
