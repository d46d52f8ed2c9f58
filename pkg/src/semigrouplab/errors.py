"""Exception types raised across semigrouplab."""


class SemigroupError(Exception):
    """Base class for all library errors."""


class InvalidGenerators(SemigroupError, ValueError):
    pass


class NotCofinite(SemigroupError, ValueError):
    """Raised when the generators have gcd > 1, so the semigroup has infinitely many gaps."""


class InvalidParameter(SemigroupError, ValueError):
    pass


class SamplerDidNotConverge(SemigroupError, RuntimeError):
    """The adaptive truncation exceeded its cap before certifying the Frobenius number."""

    def __init__(self, p, trial_id, M):
        super().__init__(f"sampler hit truncation cap at M={M} (p={p}, trial={trial_id})")
        self.p = p
        self.trial_id = trial_id
        self.M = M


class BudgetExceeded(SemigroupError, RuntimeError):
    def __init__(self, check, needed, budget):
        super().__init__(f"{check}: needs {needed} cases, budget is {budget}")
        self.check = check
        self.needed = needed
        self.budget = budget


class InvariantViolation(SemigroupError, AssertionError):
    """A computed record broke one of the elementary semigroup inequalities."""
