"""Exception hierarchy shared by all modules."""


class InputError(ValueError):
    """An argument violates a documented precondition."""


class DomainError(InputError):
    """A scalar function was asked to act outside its domain."""


class NotPSDError(InputError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class PreconditionError(InputError):
    """A hypothesis on a chain step fails; ``step`` names the offending index."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class NumericalError(ArithmeticError):
    """Floating point drift exceeded a verification tolerance."""


class InternalError(RuntimeError):
    """An invariant that holds by construction was found broken."""


class CertificateError(RuntimeError):
    """A stage of the certificate pipeline failed."""

    def __init__(self, stage, cause):
        super().__init__(f"certificate stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause
