"""Exception types shared across the package."""


class PhasewaveError(Exception):
    """Base class for all package errors."""


class ConfigError(PhasewaveError):
    """Invalid configuration (bad layer sizes, empty grids, bad options)."""


class DataError(PhasewaveError):
    """Problem with supplied sample data (empty convolution window, ...)."""


class NumericsError(PhasewaveError):
    """Non-finite value encountered during evaluation."""


class TrainingError(PhasewaveError):
    """Training diverged. Carries the loss history up to the failure."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []


class KernelError(PhasewaveError):
    """Green's kernel cannot be evaluated (near-resonant wave number)."""


class ResonanceError(PhasewaveError):
    """Discrete operator is singular or near-singular."""


class ResolutionError(PhasewaveError):
    """Grid under-resolves the wave length (strict mode only)."""


class DegenerateReferenceError(PhasewaveError):
    """Reference signal has zero norm; relative error undefined."""
