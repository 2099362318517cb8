class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class StateError(RuntimeError):
    """A series state is missing data an operation needs."""


class NumericalInconsistencyError(ArithmeticError):
    """A quantity that must vanish identically did not, beyond tolerance."""
