"""Exception types shared across the package."""


class TracedownError(Exception):
    """Base class for all package errors."""


class HermiticityViolation(TracedownError, ValueError):
    """A matrix expected to be Hermitian is not, beyond tolerance."""


class NotPSD(TracedownError, ValueError):
    """A matrix expected to be positive semidefinite has a negative eigenvalue."""


class DimensionMismatch(TracedownError, ValueError):
    pass


class ConvergenceError(TracedownError, RuntimeError):
    pass


class PostselectionImpossible(TracedownError, ValueError):
    """The success probability of a postselected outcome is (numerically) zero."""


class NotAnOperation(TracedownError, ValueError):
    """A map fails complete positivity or trace non-increase."""


class IntegrationUnstable(TracedownError, RuntimeError):
    """The fixed-step integrator produced a state with a negative eigenvalue."""
