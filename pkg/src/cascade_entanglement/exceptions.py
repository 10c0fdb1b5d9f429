"""Exception types raised by the simulator."""


class CascadeError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CascadeError, ValueError):
    """Invalid or incomplete configuration. ``path`` names the offending field."""

    def __init__(self, message, path=None):
        self.path = path
        self.message = message
        if path:
            message = f"{path}: {message}"
        super().__init__(message)


class UnstableDynamicsError(CascadeError):
    """The drift matrix has an eigenvalue with nonnegative real part."""

    def __init__(self, margin):
        self.margin = margin
        super().__init__(f"unstable dynamics: max Re(eig(A)) = {margin!r} >= 0")


class NumericalError(CascadeError):
    """A linear-algebra step failed or missed its accuracy target."""


class NonPhysicalStateError(CascadeError, ValueError):
    """Covariance matrix violates the uncertainty bound."""
