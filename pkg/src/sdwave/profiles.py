"""Initial-data families on a radial grid.

All profiles vanish at both ends of the grid so they satisfy the Dirichlet
conditions exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .grid import RadialGrid


def smoothstep(tau):
    """Quintic bridge ``tau^3 (10 - 15 tau + 6 tau^2)``; C^2 at 0 and 1."""
    tau = np.clip(np.asarray(tau, dtype=float), 0.0, 1.0)
    return tau**3 * (10.0 - 15.0 * tau + 6.0 * tau * tau)


def sigma_bump(r, center: float, width: float):
    """C^2 bump ``smoothstep(1 - |r - center| / width)`` supported on ``[c-w, c+w]``."""
    return smoothstep(1.0 - np.abs(np.asarray(r, dtype=float) - center) / width)


def cinf_bump(r, center: float, width: float):
    """``exp(1 - 1/(1 - s^2))`` with ``s = (r - center)/width``; peak value 1."""
    s = (np.asarray(r, dtype=float) - center) / width
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
    return out


def gaussian(r, center: float, width: float):
    return np.exp(-(((np.asarray(r, dtype=float) - center) / width) ** 2))


PROFILES = {
    "sigma": sigma_bump,
    "cinf": cinf_bump,
    "gaussian": gaussian,
}


def make_profile(grid: RadialGrid, name: str = "sigma", amplitude: float = 1.0,
                 center: float | None = None, width: float | None = None):
    """Sample profile ``name`` on ``grid`` and scale it by ``amplitude``.

    Defaults place the bump at ``r_obs + 3`` with half-width 2.
    """
    try:
        fn = PROFILES[name]
    except KeyError:
        raise ConfigError(f"unknown profile {name!r}; choose from {sorted(PROFILES)}") from None
    c = grid.spec.r_obs + 3.0 if center is None else center
    w = 2.0 if width is None else width
    if not w > 0:
        raise ConfigError("profile width must be positive")
    out = amplitude * fn(grid.nodes, c, w)
    out[0] = out[-1] = 0.0
    return out
