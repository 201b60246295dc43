"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid argument or malformed input data."""


class ParseError(InputError):
    """A file could not be parsed; ``row`` is 1-based when known."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class NumericalError(ArithmeticError):
    """A linear system could not be factorized even at the jitter cap."""

    def __init__(self, message, jitter=None):
        if jitter is not None:
            message = f"{message} (last jitter tried: {jitter:.3g})"
        super().__init__(message)
        self.jitter = jitter


class OracleError(RuntimeError):
    """An oracle failed to return a usable value."""


class RemoteOracleError(OracleError):
    """The remote prediction endpoint failed or returned an invalid body."""
