"""Exception types shared across the package."""


class SingularSymbolError(ValueError):
    """A Fourier multiplier is evaluated exactly on one of its poles."""


class SupportError(ValueError):
    """A potential's support does not fit the requested box or cell cover."""


class EmptySupportError(SupportError):
    """An operation that needs a nontrivial potential got the zero field."""


class SparseSeparationError(RuntimeError):
    """Greedy sparse grouping exceeded its family budget.

    Carries the achieved family count and the budget so callers can report
    diagnostics instead of guessing.
    """

    def __init__(self, message, families_needed, budget):
        super().__init__(message)
        self.families_needed = families_needed
        self.budget = budget


class ConfigError(ValueError):
    """A run configuration failed validation."""
