"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class NumericalFailure(ArithmeticError):
    """A numerical routine did not reach its tolerance or overflowed."""
