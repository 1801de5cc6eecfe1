"""Exception types shared across the package."""


class CbrapError(Exception):
    """Base class for all errors raised by this package."""


class InvalidDimensionError(CbrapError, ValueError):
    """Operand dimensions are inconsistent or out of range."""


class InvalidInputError(CbrapError, ValueError):
    """An input value is malformed (non-finite, empty, out of domain)."""


class DegenerateInputError(CbrapError, ValueError):
    """An input is degenerate for the requested operation (e.g. zero norm)."""


class ConfigError(CbrapError, ValueError):
    """An experiment configuration failed validation."""


class DatasetError(CbrapError, ValueError):
    """A context dataset failed to parse or is internally inconsistent."""


class EndOfDataError(CbrapError, RuntimeError):
    """A replay dataset has no rows left for the requested round."""
