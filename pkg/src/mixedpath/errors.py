"""Exception hierarchy.

Domain errors (bad inputs, infeasible requests) derive from ``DomainError``;
numerical failures derive from ``NumericalError``.  The CLI maps the two
families to distinct exit codes.
"""


class MixedPathError(Exception):
    """Base class for every error raised by the package."""


class DomainError(MixedPathError, ValueError):
    pass


class NumericalError(MixedPathError, ArithmeticError):
    pass


class ConfigError(DomainError):
    pass


class PathExplosion(DomainError):
    def __init__(self, predicted, limit):
        super().__init__(f"path count {predicted} exceeds max_paths={limit}")
        self.predicted = predicted
        self.limit = limit


class InfeasibleEndpoints(DomainError):
    pass


class StepOutOfRange(DomainError):
    pass


class ModelDomain(DomainError):
    pass


class MatrixTooLarge(DomainError):
    pass


class DimensionMismatch(DomainError):
    pass


class NormModeError(DomainError):
    pass


class GridMismatch(DomainError):
    pass


class IndexOutOfRange(DomainError, IndexError):
    pass


class GeneratorMismatch(DomainError):
    pass


class Caustic(DomainError):
    pass


class NoConvergence(NumericalError):
    """Iteration limit reached; ``result`` holds the best iterate (may be None)."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class GridTooCoarse(UserWarning):
    pass
