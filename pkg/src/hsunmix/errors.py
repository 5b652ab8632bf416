"""Shared exception types."""


class NumericalError(RuntimeError):
    """A numerical routine diverged, failed to factorize, or produced
    non-finite values."""


class InputDataError(ValueError):
    """An input file could not be parsed into the expected shape."""
