"""Exception types raised across the package."""


class RBNError(Exception):
    """Base class for all errors raised by :mod:`rbn`."""


class InvalidDimsError(RBNError, ValueError):
    """Subsystem dimensions do not match the operator they describe."""


class InvalidOperatorError(RBNError, ValueError):
    """An operator fails a structural requirement (square, Hermitian, ...)."""


class NotPositiveSemidefiniteError(RBNError, ValueError):
    """A spectrum contains an eigenvalue below the clamping tolerance."""


class InvalidArgumentError(RBNError, ValueError):
    pass


class NotPureError(RBNError, ValueError):
    pass


class ConsistencyError(RBNError, ArithmeticError):
    """A quantity that must be nonnegative came out clearly negative.

    Raised instead of silently clamping, so genuine numerical defects
    surface rather than being hidden as floating-point noise.
    """
