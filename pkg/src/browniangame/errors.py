"""Exception hierarchy shared across the solver library."""


class GameError(Exception):
    """Base class for everything raised by this package."""


class ValidationError(GameError, ValueError):
    """Invalid game/organization parameters or a malformed spec file."""


class SolverError(GameError, RuntimeError):
    """A numerical routine failed (no admissible regime, inconsistency, ...)."""


class ConvergenceError(SolverError):
    """An iterative routine hit its iteration cap before reaching tolerance."""
