"""Pure-Python (numpy/LAPACK) versions of the compiled kernels in ``_core.pyx``."""

import numpy as np
from scipy.linalg import lapack

PIVOT_MIN = 1e-14


def laplacian(lower, diag, upper, g, out):
    out[0] = 0.0
    out[-1] = 0.0
    out[1:-1] = lower[1:-1] * g[:-2] + diag[1:-1] * g[1:-1] + upper[1:-1] * g[2:]
    return out


class ThomasFactor:
    """LU factors of a tridiagonal matrix via LAPACK ``?gttrf``."""

    def __init__(self, sub, diag, sup):
        self.size = len(diag)
        dl = np.array(sub[1:], dtype=float)
        du = np.array(sup[:-1], dtype=float)
        d = np.array(diag, dtype=float)
        dl, d, du, du2, ipiv, info = lapack.dgttrf(dl, d, du)
        if info > 0 or np.min(np.abs(d)) < PIVOT_MIN:
            i = int(np.argmin(np.abs(d)))
            raise ZeroDivisionError(f"pivot {d[i]:.3e} at row {i}")
        self._lu = (dl, d, du, du2, ipiv)

    def solve_into(self, rhs, out):
        x, info = lapack.dgttrs(*self._lu, np.asarray(rhs, dtype=float))
        out[:] = x

    def solve(self, rhs):
        out = np.empty(self.size)
        self.solve_into(rhs, out)
        return out


def theta_step(u, v, forcing, lower, diag, upper, fac, dt, theta, u_out, v_out, work):
    cs = (1.0 - theta) * (1.0 + dt * theta)
    np.multiply(v, cs, out=work)
    work += u
    laplacian(lower, diag, upper, work, u_out)
    u_out += forcing
    u_out *= dt
    u_out += v
    u_out[0] = 0.0
    u_out[-1] = 0.0
    fac.solve_into(u_out, v_out)
    v_out[0] = 0.0
    v_out[-1] = 0.0
    u_out[:] = u + dt * (theta * v_out + (1.0 - theta) * v)
    u_out[0] = 0.0
    u_out[-1] = 0.0


def _grad(g, dx):
    return np.gradient(g, dx, edge_order=2)


def h1_pair_norm(u, v, w, dx):
    du = _grad(u, dx)
    dv = _grad(v, dx)
    return float(
        np.sqrt(np.dot(w, u * u)) + np.sqrt(np.dot(w, du * du))
        + np.sqrt(np.dot(w, v * v)) + np.sqrt(np.dot(w, dv * dv))
    )
