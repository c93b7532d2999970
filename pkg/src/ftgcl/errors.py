"""Exception types shared across the package."""


class FtgclError(Exception):
    """Base class for all package errors."""


class NotFound(FtgclError, FileNotFoundError):
    pass


class SchemaError(FtgclError, ValueError):
    """Input files are present but malformed or mutually inconsistent."""


class InvalidArgument(FtgclError, ValueError):
    pass


class NumericalError(FtgclError, ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


class DegenerateLossError(NumericalError):
    """Training hit a loss that cannot be evaluated (e.g. a zero-norm channel)."""

    def __init__(self, step, reason):
        super().__init__(f"degenerate loss at step {step}: {reason}")
        self.step = step
