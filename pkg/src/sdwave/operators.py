"""Discrete radial Laplacian and tridiagonal solves.

The Laplacian is assembled in conservative form,

    (Lap_h g)_j = [A_{j+1/2} (g_{j+1} - g_j) - A_{j-1/2} (g_j - g_{j-1})] / (dx * w_j)

with face areas ``A`` and dual-cell volumes ``w`` taken from the grid.  This
makes ``Lap_h`` self-adjoint and non-positive in the quadrature inner
product, which is what gives the time stepper its exact energy inequality.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from ._backend import kernels
from .errors import NumericError, SingularSystemError
from .grid import RadialGrid


@dataclass(frozen=True, eq=False)
class LaplacianStencil:
    grid: RadialGrid
    lower: NDArray[np.float64] = field(repr=False)
    diag: NDArray[np.float64] = field(repr=False)
    upper: NDArray[np.float64] = field(repr=False)

    def matrix(self):
        """Dense matrix form (testing aid; boundary rows are zero)."""
        m = self.grid.size
        a = np.zeros((m, m))
        idx = np.arange(1, m - 1)
        a[idx, idx - 1] = self.lower[1:-1]
        a[idx, idx] = self.diag[1:-1]
        a[idx, idx + 1] = self.upper[1:-1]
        return a


def make_stencil(grid: RadialGrid) -> LaplacianStencil:
    m = grid.size
    lower = np.zeros(m)
    upper = np.zeros(m)
    scale = grid.dx * grid.quad_weights[1:-1]
    lower[1:-1] = grid.face_area[:-1] / scale
    upper[1:-1] = grid.face_area[1:] / scale
    diag = -(lower + upper)
    return LaplacianStencil(grid, lower, diag, upper)


def apply_laplacian(s: LaplacianStencil, g) -> NDArray[np.float64]:
    g = np.ascontiguousarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise NumericError("non-finite entries passed to the Laplacian")
    out = np.empty_like(g)
    kernels.laplacian(s.lower, s.diag, s.upper, g, out)
    return out


@dataclass(frozen=True, eq=False)
class Tridiagonal:
    """Tridiagonal matrix by its three diagonals (``sub[0]`` and ``sup[-1]`` unused)."""

    sub: NDArray[np.float64]
    diag: NDArray[np.float64]
    sup: NDArray[np.float64]

    def matvec(self, x):
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.sub[1:] * x[:-1]
        y[:-1] += self.sup[:-1] * x[1:]
        return y

    def factor(self):
        try:
            return kernels.ThomasFactor(
                np.ascontiguousarray(self.sub, dtype=float),
                np.ascontiguousarray(self.diag, dtype=float),
                np.ascontiguousarray(self.sup, dtype=float),
            )
        except ZeroDivisionError as exc:
            raise SingularSystemError(f"singular tridiagonal system: {exc}") from None


def solve_tridiagonal(a: Tridiagonal, rhs) -> NDArray[np.float64]:
    """Solve ``a x = rhs`` by elimination."""
    rhs = np.ascontiguousarray(rhs, dtype=np.float64)
    return a.factor().solve(rhs)


def implicit_matrix(s: LaplacianStencil, dt: float, theta: float) -> Tridiagonal:
    """``I - dt*theta*(1 + dt*theta) * Lap_h`` with identity Dirichlet rows."""
    c = dt * theta * (1.0 + dt * theta)
    sub = -c * s.lower
    sup = -c * s.upper
    diag = 1.0 - c * s.diag
    diag[0] = diag[-1] = 1.0
    sub[0] = sub[-1] = 0.0
    sup[0] = sup[-1] = 0.0
    return Tridiagonal(sub, diag, sup)
