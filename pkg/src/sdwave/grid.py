"""Radial discretization of exterior domains.

For ``n >= 2`` the domain is the exterior of the ball of radius ``r_obs``,
truncated at ``r_out``; for ``n = 1`` it is the half-line ``(0, r_out)``.
Every integral over the domain is reduced to a weighted sum over the radial
nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .errors import ConfigError, NumericError

MIN_NODES = 16


def sphere_area(n: int) -> float:
    """Surface area of the unit (n-1)-sphere; 1 for ``n = 1``."""
    if n == 1:
        return 1.0
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


@dataclass(frozen=True)
class DomainSpec:
    n: int
    r_obs: float
    r_out: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError(f"dimension must be an integer >= 1, got {self.n}")
        if self.n == 1 and self.r_obs != 0.0:
            raise ConfigError("the half-line (n=1) requires r_obs = 0")
        if self.n >= 2 and not self.r_obs > 0.0:
            raise ConfigError(f"n={self.n} requires an obstacle radius r_obs > 0")
        if not self.r_out > self.r_obs:
            raise ConfigError("r_out must exceed r_obs")
        if self.r_out / max(self.r_obs, 1.0) < 4.0:
            raise ConfigError(
                f"truncation radius too close to the obstacle: "
                f"r_out/max(r_obs,1) = {self.r_out / max(self.r_obs, 1.0):.3g} < 4"
            )


@dataclass(frozen=True, eq=False)
class RadialGrid:
    """Uniform radial grid with finite-volume quadrature.

    Attributes
    ----------
    spec : DomainSpec
    j_max : int
        Index of the last node; there are ``j_max + 1`` nodes.
    dx : float
    nodes : ndarray
        ``r_j = r_obs + j*dx``.
    quad_weights : ndarray
        Volume of the dual cell around each node (half cells at both ends),
        so that the weights sum to the exact shell volume.
    face_area : ndarray
        ``c_n r^{n-1}`` at the ``j_max`` cell faces ``r_{j+1/2}``.
    """

    spec: DomainSpec
    j_max: int
    dx: float
    nodes: NDArray[np.float64] = field(repr=False)
    quad_weights: NDArray[np.float64] = field(repr=False)
    face_area: NDArray[np.float64] = field(repr=False)

    @property
    def n(self) -> int:
        return self.spec.n

    @property
    def size(self) -> int:
        return self.j_max + 1

    def interior(self) -> slice:
        return slice(1, self.j_max)

    def zeros(self) -> NDArray[np.float64]:
        return np.zeros(self.size)

    def sample(self, func) -> NDArray[np.float64]:
        """Evaluate ``func(r)`` on the nodes and impose the Dirichlet values."""
        g = np.asarray(func(self.nodes), dtype=float) * np.ones(self.size)
        g[0] = 0.0
        g[-1] = 0.0
        return g

    def shell_volume(self) -> float:
        n, a, b = self.n, self.spec.r_obs, self.spec.r_out
        return sphere_area(n) * (b**n - a**n) / n


def build_grid(spec: DomainSpec, j_max: int) -> RadialGrid:
    if int(j_max) != j_max or j_max < MIN_NODES:
        raise ConfigError(f"j_max must be an integer >= {MIN_NODES}, got {j_max}")
    j_max = int(j_max)
    n = spec.n
    dx = (spec.r_out - spec.r_obs) / j_max
    nodes = spec.r_obs + dx * np.arange(j_max + 1)
    nodes[-1] = spec.r_out
    cn = sphere_area(n)
    faces = 0.5 * (nodes[:-1] + nodes[1:])
    edges = np.concatenate(([spec.r_obs], faces, [spec.r_out]))
    weights = cn * (edges[1:] ** n - edges[:-1] ** n) / n
    face_area = cn * faces ** (n - 1)
    return RadialGrid(spec, j_max, dx, nodes, weights, face_area)


def _check_finite(g: NDArray[np.float64]) -> None:
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite entries in grid field")


def integrate(grid: RadialGrid, g) -> float:
    """Quadrature value of the integral of ``g`` over the truncated domain."""
    g = np.asarray(g, dtype=float)
    _check_finite(g)
    return float(np.dot(grid.quad_weights, g))


def inner(grid: RadialGrid, f, g) -> float:
    return integrate(grid, np.asarray(f) * np.asarray(g))


def radial_derivative(grid: RadialGrid, g) -> NDArray[np.float64]:
    """Centered difference in the interior, second-order one-sided at the ends."""
    return np.gradient(np.asarray(g, dtype=float), grid.dx, edge_order=2)


def l2_norm(grid: RadialGrid, g) -> float:
    g = np.asarray(g, dtype=float)
    _check_finite(g)
    return math.sqrt(max(float(np.dot(grid.quad_weights, g * g)), 0.0))


def h1_seminorm(grid: RadialGrid, g) -> float:
    return l2_norm(grid, radial_derivative(grid, g))


def h1_norm(grid: RadialGrid, g) -> float:
    # sum of the two parts, not the root of the sum of squares
    return l2_norm(grid, g) + h1_seminorm(grid, g)


def face_gradient_sq(grid: RadialGrid, g) -> float:
    """Squared gradient norm built from face differences.

    Equals ``-<Lap_h g, g>`` for Dirichlet fields, which makes it the gradient
    part of the discrete energy.
    """
    g = np.asarray(g, dtype=float)
    d = np.diff(g)
    return float(np.dot(grid.face_area, d * d) / grid.dx)
