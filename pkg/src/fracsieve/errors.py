"""Exception hierarchy shared by every module."""


class SieveError(Exception):
    """Base class; ``module`` names where the failure originated."""

    module = "fracsieve"


class DomainError(SieveError, ValueError):
    """An argument lies outside the domain of the operation."""


class SequenceError(DomainError):
    """A growth sequence failed its monotonicity / positivity contract."""

    module = "sequence"

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class CapacityError(SieveError):
    """A configured cap (index, run count, work budget, level) was exceeded."""


class PrecisionError(SieveError):
    """An enclosure could not be resolved at the maximum working precision."""


class EmptySurvivors(SieveError):
    """The survivor set became empty at stage ``n``."""

    module = "sieve"

    def __init__(self, n: int, state=None):
        super().__init__(f"survivor set empty after stage n={n}")
        self.n = n
        self.state = state


class ConfigError(SieveError, ValueError):
    module = "cli"
