"""Exception hierarchy shared by every module of the package."""


class ScaleKernelError(Exception):
    """Base class for all package errors."""


class InvalidParameter(ScaleKernelError, ValueError):
    pass


class CoefficientDomainError(ScaleKernelError):
    pass


class OrderDomainError(ScaleKernelError, ValueError):
    pass


class DomainError(ScaleKernelError, ValueError):
    pass


class ParameterPole(ScaleKernelError, ValueError):
    pass


class QuadratureNonConvergence(ScaleKernelError, ArithmeticError):
    pass


class UnsupportedFamily(ScaleKernelError):
    pass


class IntegrationFailure(ScaleKernelError, ArithmeticError):
    pass


class AssumptionViolation(ScaleKernelError):
    pass


class OrderingError(ScaleKernelError, ValueError):
    pass


class NoBracket(ScaleKernelError):
    """Raised when the barrier function never turns positive below ``a_max``."""

    def __init__(self, message: str, last_a: float, last_value: float):
        super().__init__(message)
        self.last_a = last_a
        self.last_value = last_value


class DegenerateKernel(ScaleKernelError, ArithmeticError):
    pass


class ConfigError(ScaleKernelError, ValueError):
    pass


class ParseError(ScaleKernelError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column


class SchemaError(ScaleKernelError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
