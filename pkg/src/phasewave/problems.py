"""Boundary-value problem descriptions for the 1-D wave solvers.

The operator is  L[u] = u'' + sign * (lam^2 + c * omega(x)) * u  with
sign=+1 for the oscillatory (Helmholtz) case and sign=-1 for the damped
elliptic case (where c is conventionally 0).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError


@dataclass
class DirichletBC:
    a: float
    b: float
    u1: complex = 0.0
    u2: complex = 0.0

    def __post_init__(self):
        if not (self.a < self.b):
            raise ConfigError(f"need a < b, got [{self.a}, {self.b}]")


@dataclass
class RobinBC:
    """Outgoing-radiation closure u'(-a) + i lam u(-a) = 0, u'(a) - i lam u(a) = 0.

    Intended for sources and media perturbations supported well inside
    [-a, a]; the wave-number factor comes from the owning problem.
    """

    a: float

    def __post_init__(self):
        if not (self.a > 0):
            raise ConfigError(f"Robin endpoint must be positive, got {self.a}")


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass
class HelmholtzProblem:
    """Full problem statement: wave number, media perturbation, source, BC.

    mu is the descriptive source frequency (used by references/configs, not
    by the operator itself).  omega_fn and f_fn are vectorized callables.
    """

    lam: float
    mu: float = 0.0
    c: float = 0.0
    omega_fn: Callable = field(default=_zero)
    f_fn: Callable = field(default=_zero)
    sign: int = 1
    bc: DirichletBC | RobinBC = field(default_factory=lambda: DirichletBC(-1.0, 1.0))
    rho: float | None = None  # boundary penalty; None -> solver default

    def __post_init__(self):
        if self.lam == 0:
            raise ConfigError("wave number lam must be nonzero")
        if self.sign not in (1, -1):
            raise ConfigError("sign must be +1 (Helmholtz) or -1 (elliptic)")
        if self.rho is not None and self.rho < 0:
            raise ConfigError("boundary penalty rho must be nonnegative")

    @property
    def domain(self) -> tuple[float, float]:
        if isinstance(self.bc, DirichletBC):
            return (self.bc.a, self.bc.b)
        return (-self.bc.a, self.bc.a)

    def coefficient(self, x) -> np.ndarray:
        """sign * (lam^2 + c * omega(x)) as an array over x."""
        x = np.asarray(x, dtype=float)
        return self.sign * (self.lam ** 2 + self.c * np.asarray(self.omega_fn(x)))
