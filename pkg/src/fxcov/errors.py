"""Exception types raised by the library; the CLI maps each to an exit code."""


class FxcovError(ValueError):
    """Base class for all library errors."""


class ConformabilityError(FxcovError):
    """Two inputs that must share a grid or a sample length do not."""


class DegenerateError(FxcovError):
    """A covariance or spectrum is too degenerate for the requested operation."""


class ParseError(FxcovError):
    """Malformed input file."""
