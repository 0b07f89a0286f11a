"""Exception types shared across the package.

Exit-code mapping used by the CLI: InfeasibleError -> 1, InputError -> 2,
ResourceError -> 3.
"""


class InputError(ValueError):
    """Malformed input: bad arguments, parse failures, violated preconditions."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(InputError):
    """A structural invariant of a design/Latin/clique object does not hold."""


class InfeasibleError(RuntimeError):
    """An exact search completed and proved the instance has no solution.

    Only raised after exhaustive search; a budget overrun raises
    ResourceError instead, never this.
    """

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload


class ResourceError(RuntimeError):
    """A size cap or time budget was exceeded before the search finished."""
