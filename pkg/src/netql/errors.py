"""Exception types shared across the package."""


class StructureError(ValueError):
    """A game, strategy or config object violates a structural invariant."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class NumericalError(RuntimeError):
    """An iterative numerical routine failed to converge.

    ``last_iterate`` carries the best available estimate at failure.
    """

    def __init__(self, message, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate
