"""Exception types shared across the package."""


class CplshError(Exception):
    """Base class for all package errors."""


class DimensionError(CplshError, ValueError):
    """Shape or length of an input is incompatible with an operation."""


class ParameterError(CplshError, ValueError):
    """A configuration parameter is outside its valid range."""


class DegenerateInputError(CplshError, ValueError):
    """An input (for example the zero vector) has no well-defined hash."""


class InsufficientTrialsError(CplshError, RuntimeError):
    """A Monte Carlo estimate cannot be formed from the observed counts."""


class FileFormatError(CplshError, ValueError):
    """A binary vectors file is malformed."""
