"""Exception and warning types shared across the package."""


class GendiagError(Exception):
    """Base class for user-facing errors (bad input, inconsistent selectors)."""


class InvalidState(GendiagError, ValueError):
    pass


class ShapeMismatch(GendiagError, ValueError):
    pass


class EmptyInput(GendiagError, ValueError):
    pass


class UndefinedRatio(GendiagError, ArithmeticError):
    """Both states have zero target density, so the MH distance is undefined."""


class EmptyHistogram(GendiagError, ValueError):
    pass


class FormatError(GendiagError, ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class Degenerate(GendiagError, ArithmeticError):
    """All draws identical across chains, PSRF is 0/0."""


class ZeroVarianceWarning(UserWarning):
    pass
