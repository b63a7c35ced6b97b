class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class InvariantViolation(ArithmeticError):
    """A computed quantity broke a physical or numerical invariant."""
