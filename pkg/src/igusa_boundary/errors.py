class IgusaError(Exception):
    """Base class for errors raised by this package."""


class SingularCurveError(IgusaError, ValueError):
    pass


class CurveFormatError(IgusaError, ValueError):
    """Malformed curve input; ``field`` names the offending key when known."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class BadPrimeError(IgusaError, ValueError):
    pass


class BudgetExceededError(IgusaError):
    pass


class PoleError(IgusaError, ZeroDivisionError):
    def __init__(self, message, p=None):
        super().__init__(message)
        self.p = p


class NotSymmetricError(IgusaError, ValueError):
    def __init__(self, witness):
        super().__init__(f"not symmetric in u, v; witness monomial {witness}")
        self.witness = witness


class LatticeError(IgusaError, ValueError):
    pass


class RelationError(IgusaError, ValueError):
    """A numeric specialization that does not respect uv = X."""


class ExpansionInvariantError(IgusaError, AssertionError):
    pass


class InsufficientDataError(IgusaError, ValueError):
    pass
