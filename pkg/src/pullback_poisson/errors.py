"""Exception hierarchy shared by all modules."""


class PoissonError(Exception):
    """Base class for every error raised by this package."""


class StructuralError(PoissonError, ValueError):
    """Operands live in incompatible ambient spaces, or have the wrong grade/degree."""


class CapabilityError(PoissonError):
    """The request is well-formed but outside what is supported."""


class ContractError(PoissonError, ValueError):
    """An argument violates the contract of the operation (e.g. wrong grade)."""


class DegenerateInputError(PoissonError, ValueError):
    pass


class MalformedSectionError(PoissonError, ValueError):
    pass


class NotPoissonError(PoissonError):
    """Raised when a tangent-space computation is attempted at a non-Poisson point."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class PreconditionError(PoissonError):
    pass


class ResonanceError(PreconditionError):
    """Carries the :class:`ResonanceCertificate` that witnesses the resonance."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class HypothesisError(PreconditionError):
    pass


class NotInImageError(PoissonError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = list(offending)


class DivisionError(PoissonError):
    pass


class ParseError(PoissonError):
    """Syntax or semantic error in an expression; ``line``/``column`` are 1-based."""

    def __init__(self, message, line=1, column=1, expected=()):
        self.line = line
        self.column = column
        self.expected = tuple(expected)
        detail = f"{message} at line {line}, column {column}"
        if self.expected:
            detail += f" (expected {', '.join(self.expected)})"
        super().__init__(detail)


class GradeMismatchError(ParseError):
    pass
