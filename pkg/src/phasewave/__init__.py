"""phasewave: phase-shifted network ansatz library and experiment runner."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DataError,
    DegenerateReferenceError,
    KernelError,
    NumericsError,
    PhasewaveError,
    ResolutionError,
    ResonanceError,
    TrainingError,
)
from .nn import (
    AdamState,
    DerivTriple,
    Mlp,
    TrainConfig,
    adam_step,
    forward_with_input_derivs,
    mlp_init,
    param_gradient,
    weight_reg,
)

__all__ = [
    "AdamState",
    "ConfigError",
    "DataError",
    "DegenerateReferenceError",
    "DerivTriple",
    "KernelError",
    "Mlp",
    "NumericsError",
    "PhasewaveError",
    "ResolutionError",
    "ResonanceError",
    "TrainConfig",
    "TrainingError",
    "adam_step",
    "forward_with_input_derivs",
    "mlp_init",
    "param_gradient",
    "weight_reg",
    "__version__",
]
