"""Numerical laboratory for semilinear strongly damped wave equations on exterior domains."""

from ._backend import BACKEND
from .errors import ConfigError, NumericError, SingularSystemError, UsageError
from .grid import DomainSpec, RadialGrid, build_grid, h1_norm, h1_seminorm, integrate, l2_norm
from .nonlinearity import NonlinKind

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfigError",
    "DomainSpec",
    "NonlinKind",
    "NumericError",
    "RadialGrid",
    "SingularSystemError",
    "UsageError",
    "build_grid",
    "h1_norm",
    "h1_seminorm",
    "integrate",
    "l2_norm",
]
