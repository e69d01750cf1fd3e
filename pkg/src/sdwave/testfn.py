"""Cutoff test functions, weak-form functionals and scaling slopes.

The composite test function is

    phi(t, r) = phi0(r) * Phi(r / S)^ell * eta(t / T)^k,

with ``S = T`` for ``n >= 2`` and ``S = T^alpha`` on the half-line.  Both
cutoffs are built from the quintic smoothstep so that they are C^2 with
closed-form derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy.integrate import cumulative_simpson, simpson

from .errors import ConfigError, DomainTooSmallError, UsageError
from .grid import integrate
from .harmonic import HarmonicWeight, phi0, phi0_dr, phi0_drr
from .nonlinearity import NonlinKind
from .profiles import smoothstep


def _sig1(tau):
    tau = np.clip(tau, 0.0, 1.0)
    return 30.0 * tau**2 * (1.0 - tau) ** 2


def _sig2(tau):
    tau = np.clip(tau, 0.0, 1.0)
    return 60.0 * tau * (1.0 - tau) * (1.0 - 2.0 * tau)


def eta(s):
    """Temporal cutoff: 1 on ``s <= 1/2``, 0 on ``s >= 1``."""
    return smoothstep(2.0 * (1.0 - np.asarray(s, dtype=float)))


def eta_d1(s):
    return -2.0 * _sig1(2.0 * (1.0 - np.asarray(s, dtype=float)))


def eta_d2(s):
    return 4.0 * _sig2(2.0 * (1.0 - np.asarray(s, dtype=float)))


def big_phi(rho):
    """Spatial cutoff: 1 on ``rho <= 1``, 0 on ``rho >= 2``."""
    return smoothstep(2.0 - np.asarray(rho, dtype=float))


def big_phi_d1(rho):
    return -_sig1(2.0 - np.asarray(rho, dtype=float))


def big_phi_d2(rho):
    return _sig2(2.0 - np.asarray(rho, dtype=float))


# sup |sigma'| = 15/8 at tau = 1/2, sup |sigma''| = 10/sqrt(3) at tau = 1/2 -+ 1/(2 sqrt 3)
ETA_D1_BOUND = 2.0 * 15.0 / 8.0
PHI_D1_BOUND = 15.0 / 8.0
PHI_D2_BOUND = 10.0 / math.sqrt(3.0)


def conjugate(e: float) -> float:
    return e / (e - 1.0)


def default_power(exponents) -> int:
    """``2 * ceil(2 * max conjugate exponent)``."""
    return 2 * math.ceil(2.0 * max(conjugate(e) for e in exponents))


@dataclass(frozen=True, eq=False)
class CutoffSet:
    """Cutoffs at scale ``T`` with powers ``k`` (time) and ``ell`` (space).

    ``psi_t``/``psi_v`` tabulate ``Psi_T(t) = int_t^T eta_T^k`` on a uniform
    grid of step ``dt``; :meth:`psi` interpolates linearly between nodes.
    """

    T: float
    k: int
    ell: int
    alpha: float
    n: int
    dt: float
    psi_t: NDArray[np.float64] = field(repr=False)
    psi_v: NDArray[np.float64] = field(repr=False)

    @property
    def space_scale(self) -> float:
        return self.T**self.alpha if self.n == 1 else self.T

    # time -------------------------------------------------------------------
    def eta_k(self, t):
        return eta(np.asarray(t, dtype=float) / self.T) ** self.k

    def eta_k_t(self, t):
        s = np.asarray(t, dtype=float) / self.T
        return self.k * eta(s) ** (self.k - 1) * eta_d1(s) / self.T

    def eta_k_tt(self, t):
        s = np.asarray(t, dtype=float) / self.T
        e, e1, e2 = eta(s), eta_d1(s), eta_d2(s)
        k = self.k
        return (k * (k - 1) * e ** (k - 2) * e1**2 + k * e ** (k - 1) * e2) / self.T**2

    def psi(self, t):
        return np.interp(t, self.psi_t, self.psi_v, right=0.0)

    # space ------------------------------------------------------------------
    def phi_l(self, r):
        return big_phi(np.asarray(r, dtype=float) / self.space_scale) ** self.ell

    def phi_l_r(self, r):
        s = self.space_scale
        rho = np.asarray(r, dtype=float) / s
        return self.ell * big_phi(rho) ** (self.ell - 1) * big_phi_d1(rho) / s

    def phi_l_rr(self, r):
        s = self.space_scale
        rho = np.asarray(r, dtype=float) / s
        b, b1, b2 = big_phi(rho), big_phi_d1(rho), big_phi_d2(rho)
        el = self.ell
        return (el * (el - 1) * b ** (el - 2) * b1**2 + el * b ** (el - 1) * b2) / s**2


def make_cutoffs(T: float, k: int | None = None, ell: int | None = None, alpha: float = 1.0,
                 n: int = 3, *, exponents=None, dt: float | None = None) -> CutoffSet:
    """Build the cutoff set; ``k``/``ell`` default from ``exponents``.

    ``dt`` sets the Simpson grid for ``Psi_T`` (default ``T/1024``).
    """
    if not T > 0:
        raise ConfigError("T must be positive")
    if n == 1 and not alpha >= 1.0:
        raise ConfigError("alpha must be >= 1 on the half-line")
    need = default_power(exponents) // 2 if exponents else 1
    k = 2 * need if k is None else int(k)
    ell = 2 * need if ell is None else int(ell)
    floor = 2 * need if exponents else 2
    if k < floor or ell < floor:
        raise ConfigError(f"k and ell must be >= {floor}, got k={k}, ell={ell}")
    dt = T / 1024 if dt is None else dt
    m = max(2, int(math.ceil(T / dt)))
    tt = np.linspace(0.0, T, m + 1)
    ek = eta(tt / T) ** k
    cum = cumulative_simpson(ek, x=tt, initial=0.0)
    psi = cum[-1] - cum
    psi[-1] = 0.0
    return CutoffSet(float(T), k, ell, float(alpha), int(n), float(T / m), tt, psi)


@dataclass
class TestFnValues:
    phi: NDArray[np.float64]
    phi_t: NDArray[np.float64]
    phi_tt: NDArray[np.float64]
    lap: NDArray[np.float64]
    lap_t: NDArray[np.float64]


def spatial_part(c: CutoffSet, w: HarmonicWeight, r):
    """``psi = phi0 * Phi_T^ell`` and its radial Laplacian, in closed form."""
    r = np.asarray(r, dtype=float)
    n, a = c.n, w.grid.spec.r_obs
    p0, p1, p2 = phi0(r, n, a), phi0_dr(r, n, a), phi0_drr(r, n, a)
    b0, b1, b2 = c.phi_l(r), c.phi_l_r(r), c.phi_l_rr(r)
    val = p0 * b0
    d1 = p1 * b0 + p0 * b1
    d2 = p2 * b0 + 2.0 * p1 * b1 + p0 * b2
    if n > 1:
        lap = d2 + (n - 1) * d1 / r
    else:
        lap = d2
    return val, lap


def composite_test_function(c: CutoffSet, w: HarmonicWeight, t, r) -> TestFnValues:
    """``phi`` and ``phi_t, phi_tt, Lap phi, Lap phi_t`` on the ``t x r`` product grid."""
    t = np.atleast_1d(np.asarray(t, dtype=float))[:, None]
    psi, lap = spatial_part(c, w, r)
    e0, e1, e2 = c.eta_k(t), c.eta_k_t(t), c.eta_k_tt(t)
    return TestFnValues(e0 * psi, e1 * psi, e2 * psi, e0 * lap, e1 * lap)


@dataclass
class FunctionalReport:
    I: float
    J: float
    I1: float
    I2: float
    I3: float
    data_u1: float
    data_u0_lap: float
    data_u0_t: float
    lhs: float
    rhs: float
    weak_residual: float


def _time_weights(times, T):
    """Trapezoid weights on the stored times within ``[0, T]``."""
    h = np.diff(times)
    wts = np.zeros_like(times)
    wts[:-1] += 0.5 * h
    wts[1:] += 0.5 * h
    return wts


def weak_form_residual(traj, kind: NonlinKind | None, c: CutoffSet, w: HarmonicWeight) -> FunctionalReport:
    """Evaluate both sides of the weak formulation with the composite test function.

    ``kind = None`` takes the forcing stored in the trajectory (linear runs).
    The trajectory must store every step and reach ``T``.
    """
    if traj.store_every != 1:
        raise UsageError("weak form needs every time step (store_every = 1)")
    times = np.asarray(traj.times)
    if len(times) < 2 or times[-1] < c.T * (1.0 - 1e-12):
        raise UsageError(f"trajectory ends at {times[-1] if len(times) else 0} < T = {c.T}")
    keep = times <= c.T * (1.0 + 1e-12)
    times = times[keep]
    u, v = traj.u[keep], traj.v[keep]
    grid = w.grid
    if 2.0 * c.space_scale > grid.spec.r_out:
        raise DomainTooSmallError(f"cutoff support 2*S = {2 * c.space_scale} exceeds r_out")
    tf = composite_test_function(c, w, times, grid.nodes)
    qw = grid.quad_weights
    tw = _time_weights(times, c.T)

    def st(a):
        return float(tw @ (a @ qw))

    if kind is None:
        f = traj.forcing[keep]
        big_i = big_j = 0.0
    else:
        f = np.zeros_like(u)
        big_i = big_j = 0.0
        if kind.p is not None:
            up = np.abs(u) ** kind.p
            big_i = st(up * tf.phi)
            f = f + up
        if kind.q is not None:
            vq = np.abs(v) ** kind.q
            big_j = st(vq * tf.phi)
            f = f + vq
        f[:, 0] = f[:, -1] = 0.0
    i1 = st(u * tf.phi_tt)
    i2 = st(u * tf.lap_t)
    i3 = -st(u * tf.lap)
    d_u1 = float(qw @ (v[0] * tf.phi[0]))
    d_lap = float(qw @ (u[0] * tf.lap[0]))
    d_t = float(qw @ (u[0] * tf.phi_t[0]))
    lhs = st(f * tf.phi) + d_u1 - d_lap - d_t
    rhs = i1 + i2 + i3
    return FunctionalReport(big_i, big_j, i1, i2, i3, d_u1, d_lap, d_t, lhs, rhs, lhs - rhs)


def sign_functional(u1, w: HarmonicWeight) -> float:
    """``int phi0 * u1``; positivity is the sign hypothesis on the data."""
    return integrate(w.grid, w.values * np.asarray(u1, dtype=float))


# scaling slopes ---------------------------------------------------------------
TERMS = ("I1", "I2_grad", "I2_lap")


def expected_slope(term: str, n: int, q: float, alpha: float = 1.0) -> float:
    """Power of ``T`` in the bound of ``term`` (the ``ln T`` factor excluded)."""
    qc = conjugate(q)
    # measure of the support: T in time, S^n in space (S = T^alpha on the half-line)
    vol = 1.0 + (alpha if n == 1 else n)
    a = alpha if n == 1 else 1.0
    if term == "I1":
        return vol + (alpha if n == 1 else 0.0) - qc
    if term == "I2_grad":
        # |grad phi0| ~ r^(1-n) for n >= 2, constant on the half-line
        return vol - a * qc - (n - 1) * qc
    if term == "I2_lap":
        return vol - 2.0 * a * qc
    raise ConfigError(f"unknown term {term!r}; choose from {TERMS}")


def log_corrected(term: str, n: int) -> bool:
    return term == "I1" and n == 2


def term_value(term: str, c: CutoffSet, q: float, r_obs: float, *, n_space=4001, n_time=2001) -> float:
    """Bound integral of ``term`` by separable Simpson quadrature."""
    qc = conjugate(q)
    n = c.n
    s = np.linspace(0.0, 1.0, n_time)
    lo = r_obs if n >= 2 else 0.0
    S = c.space_scale
    if term == "I1":
        e = eta(s)
        time_int = c.T ** (1.0 - qc) * simpson(e ** ((c.k - 1) * qc) * np.abs(eta_d1(s)) ** qc, x=s)
        r = np.linspace(lo, 2.0 * S, n_space)
        space = phi0(r, n, max(r_obs, 1e-300)) * c.phi_l(r)
    else:
        time_int = c.T * simpson(eta(s) ** c.k, x=s)
        r = np.linspace(max(lo, S), 2.0 * S, n_space)
        rho = r / S
        b = big_phi(rho)
        grad_b = np.abs(big_phi_d1(rho)) / S
        if term == "I2_grad":
            g0 = np.abs(phi0_dr(r, n, max(r_obs, 1e-300)))
            space = b ** (c.ell - qc) * g0**qc * grad_b**qc
        elif term == "I2_lap":
            lap_b = big_phi_d2(rho) / S**2
            if n > 1:
                lap_b = lap_b + (n - 1) * big_phi_d1(rho) / (S * r)
            space = b ** (c.ell - qc) * np.abs(lap_b) ** qc
        else:
            raise ConfigError(f"unknown term {term!r}; choose from {TERMS}")
    jac = r ** (n - 1) * (2.0 * math.pi ** (n / 2) / math.gamma(n / 2)) if n > 1 else 1.0
    return float(time_int * simpson(space * jac, x=r))


@dataclass
class SlopeReport:
    term: str
    T: NDArray[np.float64]
    values: NDArray[np.float64]
    slope: float
    residual: float
    expected: float
    log_corrected: bool

    def rows(self):
        return [(float(t), float(v), self.slope, self.residual) for t, v in zip(self.T, self.values)]


def scaling_slope(term: str, n: int, q: float, T_list, *, k=None, ell=None, alpha: float = 1.0,
                  r_obs: float | None = None, r_out: float | None = None) -> SlopeReport:
    """Fit the log-log slope of a bound integral over ``T_list``.

    For ``n = 2`` the ``I1`` values are divided by ``ln T`` first.  When
    ``r_out`` is given it must contain the support ``2 * S`` of the largest T.
    """
    T_arr = np.asarray(T_list, dtype=float)
    if len(T_arr) < 4:
        raise UsageError("need at least four T values")
    if r_obs is None:
        r_obs = 0.0 if n == 1 else 1.0
    vals = np.empty_like(T_arr)
    for i, T in enumerate(T_arr):
        c = make_cutoffs(T, k, ell, alpha, n, exponents=[q])
        if r_out is not None and 2.0 * c.space_scale > r_out:
            raise DomainTooSmallError(f"r_out = {r_out} does not contain 2*S = {2 * c.space_scale}")
        vals[i] = term_value(term, c, q, r_obs)
    y = vals / np.log(T_arr) if log_corrected(term, n) else vals
    coef, res, *_ = np.polyfit(np.log(T_arr), np.log(y), 1, full=True)
    resid = float(math.sqrt(res[0] / len(T_arr))) if len(res) else 0.0
    return SlopeReport(term, T_arr, vals, float(coef[0]), resid,
                       expected_slope(term, n, q, alpha), log_corrected(term, n))


def critical_prefactor_exponent(n: int, q: float) -> float:
    """``-1 + (1 + n)/q'``: zero exactly at ``q = 1 + 1/n``."""
    return -1.0 + (1.0 + n) / conjugate(q)
