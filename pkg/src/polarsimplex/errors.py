"""Exception types raised by polarsimplex."""


class PolarError(ValueError):
    """Base class for all library errors."""


class InvalidParameterError(PolarError):
    pass


class DomainError(PolarError):
    """An argument fell outside the domain of a kernel or transform."""


class PreconditionError(PolarError):
    """An operation was called on inputs its hypotheses do not cover."""


class DegenerateConfigurationError(PolarError):
    """The simplex spanned by a configuration is degenerate."""

    def __init__(self, message, determinant=0.0):
        super().__init__(message)
        self.determinant = determinant
