"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or produced an invalid value."""


class EnvelopeError(NumericalError):
    """A rejection-sampling envelope was found to undershoot the target."""
