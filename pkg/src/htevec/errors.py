"""Exception hierarchy shared by every module of the package."""


class HtevecError(Exception):
    """Base class for all package errors."""


class ParameterError(HtevecError, ValueError):
    """Invalid specification, grid or configuration value."""


class DomainError(HtevecError, ValueError):
    """Argument outside the domain of the function (e.g. real ``z``)."""


class UnsupportedKernelError(ParameterError):
    """The requested model has no usable bivariate kernel."""


class NumericError(HtevecError, ArithmeticError):
    """A numerical routine (eigensolver, quadrature) failed."""


class SolverError(NumericError):
    """A fixed-point iteration did not converge.

    Attributes
    ----------
    residual : float
        Sup-norm residual at the last iterate.
    iterations : int
        Number of iterations performed.
    """

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
