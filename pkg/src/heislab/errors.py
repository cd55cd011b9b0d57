"""Exception types raised across heislab."""

import os

DEFAULT_BUDGET = 10**9


class BudgetExceededError(RuntimeError):
    """An enumeration would visit more candidates than the configured budget."""

    def __init__(self, what, needed, budget):
        self.needed = needed
        self.budget = budget
        super().__init__(
            f"{what}: {needed} candidate points exceed the enumeration budget of "
            f"{budget} (set HEISLAB_BUDGET to override)"
        )


class EmptyInputError(ValueError):
    pass


class FalsifiedInvariantError(RuntimeError):
    """A machine-checked inequality that should hold by construction failed."""


def enumeration_budget(default=DEFAULT_BUDGET):
    raw = os.environ.get("HEISLAB_BUDGET")
    if raw is None:
        return default
    try:
        return int(float(raw))
    except ValueError:
        raise ValueError(f"HEISLAB_BUDGET must be a number, got {raw!r}") from None


def check_budget(what, needed, budget=None):
    limit = enumeration_budget() if budget is None else budget
    if needed > limit:
        raise BudgetExceededError(what, needed, limit)
