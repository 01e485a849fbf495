"""Exception hierarchy shared by every dynspec module.

Input problems subclass ``ValueError`` so callers that already guard with
``except ValueError`` keep working; numerical breakdowns subclass
``NumericalError`` and map to a separate CLI exit code.
"""

from __future__ import annotations


class DynSpecError(Exception):
    """Base class for all dynspec errors."""


class InputError(DynSpecError, ValueError):
    """Invalid map, parameter, or configuration."""


class NumericalError(DynSpecError, ArithmeticError):
    """An iterative or dense numerical method failed."""


class NotAPartition(InputError):
    pass


class NotMarkov(InputError):
    def __init__(self, branch: int, element: int, message: str | None = None) -> None:
        self.branch = branch
        self.element = element
        super().__init__(
            message
            or f"Branch {branch} image is not aligned with partition element {element}"
        )


class NotExpanding(InputError):
    def __init__(self, branch: int, slope: float) -> None:
        self.branch = branch
        self.slope = slope
        super().__init__(f"Branch {branch} has slope {slope!r} with |slope| <= 1")


class OutOfDomain(InputError):
    pass


class NoSuchBranch(InputError):
    pass


class ParameterOutOfRange(InputError):
    pass


class DegreeOrder(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class LevelTooDeep(InputError):
    pass


class BudgetExceeded(InputError):
    pass


class WindowTooNoisy(InputError):
    pass


class DerivativeUndefined(InputError):
    pass


class InverseBranchFailure(InputError):
    pass


class MapFileError(InputError):
    pass


class NoConvergence(NumericalError):
    pass


class NotConverged(NumericalError):
    pass


class NonPositiveVector(NumericalError):
    pass
