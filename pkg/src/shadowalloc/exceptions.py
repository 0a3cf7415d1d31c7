"""Exception hierarchy. The CLI maps these onto exit codes."""


class ShadowAllocError(Exception):
    """Base class for all package errors."""


class StructuralError(ShadowAllocError, ValueError):
    """Operands have incompatible shapes, e.g. Pauli strings of different length."""


class ContractViolation(ShadowAllocError, ValueError):
    """A documented precondition of an operation was not met."""


class FormatError(ShadowAllocError, ValueError):
    """Text input could not be parsed."""


class EmptyHamiltonianError(FormatError):
    """No non-identity terms survive parsing."""

    def __init__(self, message, identity_offset=0.0):
        super().__init__(message)
        self.identity_offset = identity_offset


class DomainError(ShadowAllocError, ValueError):
    """A numeric parameter lies outside its admissible range."""


class ConfigurationError(DomainError):
    """Inconsistent hyperparameters (e.g. alpha too small for the coefficients)."""


class BoundUndefinedError(DomainError):
    """The tail bound needs every term to have at least one compatible setting."""


class UnsupportedEstimationError(DomainError):
    """The requested estimator cannot be built for this compatibility indicator."""


class ResourceCapError(ShadowAllocError, RuntimeError):
    """The problem size exceeds a configured cap (qubits for brute force or simulation)."""


class NonConvergenceError(ShadowAllocError, RuntimeError):
    """The eigensolver did not reach the requested residual."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual
