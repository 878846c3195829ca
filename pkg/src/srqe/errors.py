"""Exception hierarchy shared across the package.

CLI exit codes: input problems map to 2, degenerate data to 3 and
configuration incompatibilities to 4 (see cli.EXIT_CODES).
"""


class SrqeError(Exception):
    """Base class for all package errors."""


class DecodeError(SrqeError):
    """An image file could not be read or decoded."""


class InvalidInputError(SrqeError):
    """An argument violates an operation's preconditions."""


class InsufficientResolutionError(InvalidInputError):
    """An image is too small for the requested pyramid geometry."""


class ConfigurationError(SrqeError):
    """Settings are internally inconsistent or incompatible with the data."""


class DegenerateInputError(SrqeError):
    """Data carries no usable signal (for example an all-flat training corpus)."""


class InvalidDictionaryError(SrqeError):
    """A dictionary holds non-finite atoms or fails its structural checks."""


class FittingError(SrqeError):
    """A model fit cannot proceed (for example a disconnected comparison graph)."""


class UndefinedCorrelationError(SrqeError):
    """A correlation is undefined because one input is constant."""
