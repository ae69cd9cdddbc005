"""Exception types shared across the package."""


class DomainError(ValueError):
    """A query point lies outside the closed unit square."""


class ConfigError(ValueError):
    """Invalid run configuration or CLI arguments."""


class SolverError(RuntimeError):
    """Linear solver failed to reach the required residual."""

    def __init__(self, message, residual_history=None):
        super().__init__(message)
        self.residual_history = list(residual_history or [])


class TimeStepError(RuntimeError):
    """The time-step admissibility check was violated."""

    def __init__(self, message, measure=None):
        super().__init__(message)
        self.measure = measure


class ConformationError(RuntimeError):
    """The conformation tensor lost positive definiteness."""

    def __init__(self, message, vertex=None):
        super().__init__(message)
        self.vertex = vertex


class CheckpointError(RuntimeError):
    """Checkpoint file is unreadable, truncated or version-incompatible."""
