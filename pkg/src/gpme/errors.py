"""Exception types shared across the package."""


class GpmeError(Exception):
    """Base class for errors raised by this package."""


class ConfigurationError(GpmeError):
    """Invalid configuration: bad field value, unknown key, incompatible grids.

    ``field`` holds a dotted path into the offending config block when known,
    e.g. ``"problem.phi.m"``.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class DataError(GpmeError):
    """Rejected input data: non-finite samples, out-of-domain evaluation."""


class StencilError(GpmeError):
    """Weight construction failed.  ``cell`` names the offending offset."""

    def __init__(self, message, cell=None):
        super().__init__(message)
        self.cell = cell


class NonConvergenceError(GpmeError):
    """Iterative solve hit its sweep budget before reaching tolerance."""

    def __init__(self, message, residual=None, sweeps=None):
        super().__init__(message)
        self.residual = residual
        self.sweeps = sweeps


class QuadratureError(GpmeError):
    """A reference quadrature failed to converge."""
