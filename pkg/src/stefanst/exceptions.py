"""Exception types shared across the solver."""


class StefanstError(Exception):
    """Base class for all package-specific errors."""


class MeshFormatError(StefanstError, ValueError):
    """Raised when a mesh document is malformed or fails validation."""


class ConfigError(StefanstError, ValueError):
    """Raised for invalid scenario configuration."""


class NonConvergenceError(StefanstError, RuntimeError):
    """Nonlinear iteration failed to converge.

    Carries the residual history of the failed solve.
    """

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = list(residuals) if residuals is not None else []


class SolverError(StefanstError, RuntimeError):
    """Linear solver failure (singular or badly conditioned system)."""


class DegenerateCrossingError(StefanstError, RuntimeError):
    """An interface crossing has no flux node on one side."""


class NoInterfaceError(StefanstError, RuntimeError):
    """No interface crossing exists (fully molten or fully frozen domain)."""


class DegenerateGradientError(StefanstError, RuntimeError):
    """Recovered level-set gradient vanishes; normal is undefined."""
