from typing import Optional


class IwalgError(Exception):
    """Base class for every failure raised by iwalg."""
    pass


class ContextMismatchError(IwalgError):
    """Raised when values from different ring contexts are combined."""
    pass


class ParseError(IwalgError):
    """Raised when a series literal or module description cannot be parsed."""

    def __init__(self, message: str, line: int = 1, column: int = 1, source: Optional[str] = None):
        self.line = line
        self.column = column
        self.source = source
        where = f"{source}:" if source else ""
        super().__init__(f"{where}{line}:{column}: {message}")


class InvalidLinearElementError(IwalgError, ValueError):
    """Raised when a0 + a1*W1 + ... + am*Wm violates p | a0 or has no unit coefficient."""
    pass


class PreparationError(IwalgError):
    """Raised when a series admits no Weierstrass preparation at the working truncation."""
    pass


class PrecisionExhaustedError(IwalgError):
    """Raised when a computation would need more p-adic digits than are known."""
    pass


class IndeterminateError(IwalgError):
    """Raised when a predicate cannot be decided at the current precision or degree cap."""
    pass


class UnsupportedShapeError(IwalgError):
    """Raised when an operation is asked of a module shape it does not support."""
    pass


class NotTorsionError(IwalgError):
    """Raised when an operation requires a torsion module and receives one of positive rank."""
    pass


class InconsistentCorankError(IwalgError):
    """Raised when a corank sequence has no nonnegative integral multiplicity solution."""
    pass


class SamplingExhaustedError(IwalgError):
    """Raised when the linear-ideal sampler cannot produce the requested count."""
    pass


class OracleSizeError(IwalgError):
    """Raised when a finite quotient would exceed the configured basis dimension."""
    pass
