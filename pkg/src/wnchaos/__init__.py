"""Multi-parameter white-noise calculus: chaos expansions, Wick algebra,
Brownian sheets, Hida-Malliavin derivatives and a space-time population SPDE."""

__version__ = "0.1.0"

from .errors import DomainError, NumericalFailure  # noqa: F401
