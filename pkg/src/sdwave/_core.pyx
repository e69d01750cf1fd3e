# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels for the radial theta-scheme.

Mirrors ``_pykernels`` function for function; ``_backend`` picks one at import.
"""

from libc.math cimport sqrt, fabs

import numpy as np

PIVOT_MIN = 1e-14


def laplacian(const double[::1] lower, const double[::1] diag, const double[::1] upper,
              const double[::1] g, double[::1] out):
    cdef Py_ssize_t j, m = g.shape[0]
    out[0] = 0.0
    out[m - 1] = 0.0
    for j in range(1, m - 1):
        out[j] = lower[j] * g[j - 1] + diag[j] * g[j] + upper[j] * g[j + 1]
    return np.asarray(out)


cdef class ThomasFactor:
    """LU factors of a tridiagonal matrix, computed once and reused."""

    cdef double[::1] sub
    cdef double[::1] cprime
    cdef double[::1] inv_denom
    cdef public Py_ssize_t size

    def __init__(self, const double[::1] sub, const double[::1] diag, const double[::1] sup):
        cdef Py_ssize_t i, m = diag.shape[0]
        cdef double denom
        self.size = m
        self.sub = np.array(sub, dtype=np.float64)
        self.cprime = np.zeros(m)
        self.inv_denom = np.zeros(m)
        for i in range(m):
            if i == 0:
                denom = diag[0]
            else:
                denom = diag[i] - sub[i] * self.cprime[i - 1]
            if fabs(denom) < PIVOT_MIN:
                raise ZeroDivisionError(f"pivot {denom:.3e} at row {i}")
            self.inv_denom[i] = 1.0 / denom
            if i < m - 1:
                self.cprime[i] = sup[i] * self.inv_denom[i]

    cpdef solve_into(self, const double[::1] rhs, double[::1] out):
        cdef Py_ssize_t i, m = self.size
        out[0] = rhs[0] * self.inv_denom[0]
        for i in range(1, m):
            out[i] = (rhs[i] - self.sub[i] * out[i - 1]) * self.inv_denom[i]
        for i in range(m - 2, -1, -1):
            out[i] -= self.cprime[i] * out[i + 1]

    def solve(self, rhs):
        r = np.ascontiguousarray(rhs, dtype=np.float64)
        out = np.empty_like(r)
        self.solve_into(r, out)
        return out


def theta_step(const double[::1] u, const double[::1] v, const double[::1] forcing,
               const double[::1] lower, const double[::1] diag, const double[::1] upper,
               ThomasFactor fac, double dt, double theta,
               double[::1] u_out, double[::1] v_out, double[::1] work):
    """One theta-scheme step; boundary values of the outputs are zero."""
    cdef Py_ssize_t j, m = u.shape[0]
    cdef double cs = (1.0 - theta) * (1.0 + dt * theta)
    # work holds s = u + cs*v, then the right-hand side
    for j in range(m):
        work[j] = u[j] + cs * v[j]
    # rhs written into u_out as scratch (u is read-only)
    u_out[0] = 0.0
    u_out[m - 1] = 0.0
    for j in range(1, m - 1):
        u_out[j] = v[j] + dt * (lower[j] * work[j - 1] + diag[j] * work[j]
                                + upper[j] * work[j + 1] + forcing[j])
    fac.solve_into(u_out, v_out)
    v_out[0] = 0.0
    v_out[m - 1] = 0.0
    for j in range(m):
        u_out[j] = u[j] + dt * (theta * v_out[j] + (1.0 - theta) * v[j])
    u_out[0] = 0.0
    u_out[m - 1] = 0.0


cdef double _l2(const double[::1] g, const double[::1] w) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(g.shape[0]):
        s += w[j] * g[j] * g[j]
    return sqrt(s)


cdef double _grad_l2(const double[::1] g, const double[::1] w, double dx) noexcept nogil:
    # same stencil as numpy.gradient(edge_order=2)
    cdef Py_ssize_t j, m = g.shape[0]
    cdef double d, s = 0.0
    d = (-1.5 * g[0] + 2.0 * g[1] - 0.5 * g[2]) / dx
    s += w[0] * d * d
    d = (1.5 * g[m - 1] - 2.0 * g[m - 2] + 0.5 * g[m - 3]) / dx
    s += w[m - 1] * d * d
    for j in range(1, m - 1):
        d = (g[j + 1] - g[j - 1]) / (2.0 * dx)
        s += w[j] * d * d
    return sqrt(s)


def h1_pair_norm(const double[::1] u, const double[::1] v, const double[::1] w, double dx):
    """``h1(u) + h1(v)`` with h1 = L2 norm + L2 norm of the radial derivative."""
    return _l2(u, w) + _grad_l2(u, w, dx) + _l2(v, w) + _grad_l2(v, w, dx)
