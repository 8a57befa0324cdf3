"""Exception types shared across the package."""


class ContractViolation(ValueError):
    """An input broke a documented precondition."""


class DegenerateParametersError(ArithmeticError):
    """The collision map has relaxation rate 1, so no steady state exists.

    Raised at resonant collision times where both Rabi-like phases complete
    whole cycles and the system returns to its initial state every collision.
    """

    def __init__(self, message, eta=None):
        super().__init__(message)
        self.eta = eta


class NonConvergenceError(RuntimeError):
    """A threshold search hit its step cap before crossing."""

    def __init__(self, message, best_distance, n_best, n_steps):
        super().__init__(message)
        self.best_distance = best_distance
        self.n_best = n_best
        self.n_steps = n_steps


class ConsistencyError(RuntimeError):
    """An internal invariant failed (positivity, first law). Indicates a bug."""
