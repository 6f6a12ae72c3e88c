"""Exception types shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise
the most specific type that applies.
"""


class HyperlatError(Exception):
    """Base class for all package errors."""


class ConfigError(HyperlatError):
    """Invalid configuration, model parameters, or argument combination."""


class CsvFormatError(HyperlatError):
    """Malformed or inconsistent delimited input."""


class NumericalError(HyperlatError):
    """A numerical routine could not produce a trustworthy result."""
