"""Exception types shared across the package."""


class FrozenPlanetError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(FrozenPlanetError, ValueError):
    """Input outside the admissible configuration space (q1 > q2 > 0, m1 > m2)."""


class NoCollision(FrozenPlanetError):
    """The outer-bound electron did not reach the nucleus within the step/time budget."""


class NoConvergence(FrozenPlanetError):
    """Newton iteration failed to reach the requested residual tolerance."""


class BranchStall(FrozenPlanetError):
    """Continuation step halving bottomed out; carries the partial branch."""

    def __init__(self, message, branch=None):
        super().__init__(message)
        self.branch = branch


class SchemaError(FrozenPlanetError, ValueError):
    """Orbit or branch file is malformed or violates a stored invariant."""
