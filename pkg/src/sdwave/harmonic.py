"""Positive harmonic weights vanishing on the obstacle.

For a ball obstacle of radius ``a`` the exterior Dirichlet problems have
closed-form radial solutions:

* ``n >= 3``: ``1 - (a/r)^(n-2)``, tending to 1 at infinity;
* ``n = 2``:  ``ln(r/a)``, growing logarithmically;
* ``n = 1``:  ``x`` on the half-line (linear growth, constant fixed to 1).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import UsageError
from .grid import RadialGrid, build_grid
from .operators import make_stencil


class WeightKind(enum.Enum):
    ONE_D = "OneD"
    TWO_D = "TwoD"
    HIGH_D = "HighD"


def phi0(r, n: int, r_obs: float):
    r = np.asarray(r, dtype=float)
    if n == 1:
        return r.copy()
    if n == 2:
        return np.log(r / r_obs)
    return 1.0 - (r_obs / r) ** (n - 2)


def phi0_dr(r, n: int, r_obs: float):
    r = np.asarray(r, dtype=float)
    if n == 1:
        return np.ones_like(r)
    if n == 2:
        return 1.0 / r
    return (n - 2) * r_obs ** (n - 2) * r ** (1.0 - n)


def phi0_drr(r, n: int, r_obs: float):
    r = np.asarray(r, dtype=float)
    if n == 1:
        return np.zeros_like(r)
    if n == 2:
        return -1.0 / r**2
    return -(n - 1) * (n - 2) * r_obs ** (n - 2) * r ** (-float(n))


@dataclass(frozen=True, eq=False)
class HarmonicWeight:
    grid: RadialGrid
    values: NDArray[np.float64] = field(repr=False)
    kind: WeightKind

    @property
    def n(self) -> int:
        return self.grid.n

    def __call__(self, r):
        return phi0(r, self.n, self.grid.spec.r_obs)

    def dr(self, r):
        return phi0_dr(r, self.n, self.grid.spec.r_obs)

    def drr(self, r):
        return phi0_drr(r, self.n, self.grid.spec.r_obs)


def make_weight(grid: RadialGrid) -> HarmonicWeight:
    n = grid.n
    kind = WeightKind.ONE_D if n == 1 else WeightKind.TWO_D if n == 2 else WeightKind.HIGH_D
    values = phi0(grid.nodes, n, grid.spec.r_obs)
    values[0] = 0.0  # exact zero on the obstacle boundary
    return HarmonicWeight(grid, values, kind)


def laplacian_residual(w: HarmonicWeight) -> float:
    """Max over interior nodes of ``|Lap_h phi0|``.

    The boundary value at ``r_out`` is not zero, so the stencil is applied
    directly to the interior rows instead of through the Dirichlet operator.
    """
    s = make_stencil(w.grid)
    g = w.values
    lap = s.lower[1:-1] * g[:-2] + s.diag[1:-1] * g[1:-1] + s.upper[1:-1] * g[2:]
    return float(np.max(np.abs(lap)))


def residual_order(spec, j_max: int = 100) -> tuple[float, float, float]:
    """Residuals at ``j_max`` and ``2*j_max`` and the observed order."""
    r1 = laplacian_residual(make_weight(build_grid(spec, j_max)))
    r2 = laplacian_residual(make_weight(build_grid(spec, 2 * j_max)))
    return r1, r2, math.log2(r1 / r2)


@dataclass
class DecayReport:
    n: int
    constant: float
    expected: float
    constant_refined: float
    bounded: bool


def gradient_decay_check(w: HarmonicWeight) -> DecayReport:
    """Max of ``|d phi0/dr| * r^(n-1)`` over nodes with ``r >= 2 r_obs``.

    The constant is recomputed on a grid with twice the resolution; it must
    agree within 5%.
    """
    n = w.n
    if n < 2:
        raise UsageError("gradient decay is only defined for n >= 2")
    r_obs = w.grid.spec.r_obs

    def const(grid):
        r = grid.nodes[grid.nodes >= 2.0 * r_obs]
        return float(np.max(np.abs(phi0_dr(r, n, r_obs)) * r ** (n - 1)))

    c1 = const(w.grid)
    c2 = const(build_grid(w.grid.spec, 2 * w.grid.j_max))
    expected = float(n - 2) * r_obs ** (n - 2) if n >= 3 else 1.0
    return DecayReport(n, c1, expected, c2, abs(c2 - c1) <= 0.05 * abs(c1))


def check_invariants(w: HarmonicWeight) -> list[str]:
    """Return violated invariants (empty list when all hold)."""
    bad = []
    v = w.values
    inner = v[1:]
    if v[0] != 0.0:
        bad.append("nonzero boundary value")
    if w.n >= 3:
        if not (np.all(inner > 0) and np.all(inner < 1)):
            bad.append("HighD weight outside (0,1)")
        if np.any(np.diff(v) < 0):
            bad.append("HighD weight not monotone")
    elif w.n == 2:
        if not np.all(inner > 0):
            bad.append("TwoD weight not positive")
    else:
        if not np.array_equal(v, w.grid.nodes):
            bad.append("OneD weight differs from x")
    return bad
