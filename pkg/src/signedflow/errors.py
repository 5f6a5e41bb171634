"""Exception types shared across the package."""


class SignedFlowError(Exception):
    """Base class for package-specific failures."""


class UnsupportedOrderError(SignedFlowError, ValueError):
    """A derivative order was requested that the potential cannot supply."""


class NonIntegrableError(SignedFlowError, ValueError):
    """A potential is not integrable; ``end`` names the failing end."""

    def __init__(self, message, end):
        super().__init__(message)
        self.end = end  # "origin" or "tail"


class ConvergenceError(SignedFlowError, RuntimeError):
    """A truncation or quadrature loop failed to reach its tolerance."""


class SingularConfigurationError(SignedFlowError, ValueError):
    """Two charged particles coincide; the force field is undefined."""


class StiffnessError(SignedFlowError, RuntimeError):
    """Step size underflow without a detectable collision."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class InvariantViolationError(SignedFlowError, RuntimeError):
    """An internal invariant failed; signals an integration bug."""


class DegenerateGradientError(SignedFlowError, ValueError):
    """The test function has zero gradient where a nonzero one is required."""


class DataError(SignedFlowError, ValueError):
    """Invalid configuration or insufficient data for a fit."""
