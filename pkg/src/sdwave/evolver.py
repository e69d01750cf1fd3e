"""Theta-scheme time stepping for ``u_tt - Lap u - Lap u_t = F``.

With ``w = v^{new}`` the step solves

    (I - dt*theta*(1 + dt*theta) Lap_h) w
        = v + dt * Lap_h(u + (1-theta)(1 + dt*theta) v) + dt * F

and then sets ``u^{new} = u + dt*(theta*w + (1-theta)*v)``.  Both ``Lap u``
and ``Lap u_t`` are implicit with weight ``theta``; a nonlinearity enters
through ``F`` frozen at the start of the step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

from ._backend import kernels
from .errors import ConfigError, UsageError
from .grid import RadialGrid, face_gradient_sq, inner
from .nonlinearity import NonlinKind, eval_f
from .operators import apply_laplacian, implicit_matrix, make_stencil

Sampler = Callable[[float], NDArray[np.float64]]


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    theta: float = 0.5
    t_end: float = 1.0
    store_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not 0.5 <= self.theta <= 1.0:
            raise ConfigError(f"theta must lie in [1/2, 1], got {self.theta}")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be non-negative")
        if int(self.store_every) != self.store_every or self.store_every < 1:
            raise ConfigError("store_every must be an integer >= 1")

    def steps_to(self, t: float) -> int:
        n = int(round(t / self.dt))
        if abs(n * self.dt - t) > 1e-9 * max(1.0, abs(t)):
            raise UsageError(f"time {t} is not a multiple of dt = {self.dt}")
        return n


@dataclass
class State:
    t: float
    u: NDArray[np.float64]
    v: NDArray[np.float64]
    overflowed: bool = False

    def copy(self) -> "State":
        return State(self.t, self.u.copy(), self.v.copy(), self.overflowed)


@dataclass
class Trajectory:
    """Stored states of one evolution (every ``store_every``-th step)."""

    times: NDArray[np.float64]
    u: NDArray[np.float64]
    v: NDArray[np.float64]
    forcing: NDArray[np.float64]
    dt: float
    store_every: int
    overflowed: bool = False

    def __len__(self):
        return len(self.times)

    def state(self, i: int) -> State:
        return State(float(self.times[i]), self.u[i], self.v[i])

    @property
    def final(self) -> State:
        return self.state(len(self) - 1)


class _Store:
    def __init__(self, every):
        self.every = every
        self.t, self.u, self.v, self.f = [], [], [], []

    def add(self, k, t, u, v, f):
        if k % self.every == 0:
            self.t.append(t)
            self.u.append(u.copy())
            self.v.append(v.copy())
            self.f.append(np.array(f, dtype=float))

    def build(self, dt, overflowed):
        return Trajectory(np.array(self.t), np.array(self.u), np.array(self.v),
                          np.array(self.f), dt, self.every, overflowed)


def _finite(a) -> bool:
    return bool(np.isfinite(a).all())


class Evolver:
    """Time stepper bound to one grid and one solver configuration.

    The implicit matrix is factored once at construction; steps reuse the
    factorization and preallocated work arrays, so an evolver must not be
    shared between threads.
    """

    def __init__(self, grid: RadialGrid, cfg: SolverConfig, *, backend=None):
        if cfg.dt > grid.dx * (1 + 1e-12):
            raise ConfigError(f"dt = {cfg.dt} exceeds dx = {grid.dx}")
        self.grid = grid
        self.cfg = cfg
        self.stencil = make_stencil(grid)
        self.kernels = kernels if backend is None else backend
        self.matrix = implicit_matrix(self.stencil, cfg.dt, cfg.theta)
        self._fac = self.kernels.ThomasFactor(self.matrix.sub, self.matrix.diag, self.matrix.sup)
        self._work = np.zeros(grid.size)
        self._zero = np.zeros(grid.size)

    def with_dt(self, dt: float) -> "Evolver":
        return Evolver(self.grid, replace(self.cfg, dt=dt), backend=self.kernels)

    # single steps -----------------------------------------------------------
    def _advance(self, u, v, f, u_out, v_out):
        s = self.stencil
        self.kernels.theta_step(u, v, f, s.lower, s.diag, s.upper, self._fac,
                                self.cfg.dt, self.cfg.theta, u_out, v_out, self._work)

    def step_linear(self, state: State, forcing: Optional[Sampler] = None) -> State:
        dt, theta = self.cfg.dt, self.cfg.theta
        f = self._zero if forcing is None else _as_field(forcing(state.t + theta * dt))
        u_new = np.empty(self.grid.size)
        v_new = np.empty(self.grid.size)
        self._advance(_as_field(state.u), _as_field(state.v), f, u_new, v_new)
        return State(state.t + dt, u_new, v_new)

    def step_semilinear(self, state: State, kind: NonlinKind) -> State:
        f, over = eval_f(kind, state.u, state.v)
        if over or state.overflowed:
            return State(state.t, state.u, state.v, True)
        new = self.step_linear(state, lambda _t: f)
        new.overflowed = not (_finite(new.u) and _finite(new.v))
        return new

    # marches ----------------------------------------------------------------
    def march(self, state: State, n_steps: int, step_forcing=None, *, store_every=None,
              store=True, observe=None, stop=None):
        """Advance ``n_steps`` steps.

        ``step_forcing(k, t, u, v)`` returns ``(f_step, f_now)``: the forcing
        used in step ``k`` and the forcing at the current time (for the
        diagnostics); ``f_step = None`` signals overflow.
        ``observe(t, u, v, f_now)`` is called at every time level;
        ``stop(t, u, v)`` may end the march early by returning True.
        Returns ``(final_state, trajectory_or_None)``.
        """
        every = self.cfg.store_every if store_every is None else store_every
        dt = self.cfg.dt
        t0 = state.t
        u = _as_field(state.u).copy()
        v = _as_field(state.v).copy()
        u_new = np.empty_like(u)
        v_new = np.empty_like(v)
        rec = _Store(every) if store else None
        overflowed = state.overflowed
        k = 0
        while True:
            t = t0 + k * dt
            if step_forcing is None:
                f_step = f_now = self._zero
            else:
                f_step, f_now = step_forcing(k, t, u, v)
                if f_step is None:
                    overflowed = True
            if observe is not None:
                observe(t, u, v, f_now)
            if rec is not None:
                rec.add(k, t, u, v, f_now)
            if overflowed or k >= n_steps or (stop is not None and stop(t, u, v)):
                break
            self._advance(u, v, f_step, u_new, v_new)
            u, u_new = u_new, u
            v, v_new = v_new, v
            k += 1
            if not (_finite(u) and _finite(v)):
                overflowed = True
        final = State(t0 + k * dt, u, v, overflowed)
        if rec is not None and (k % every) != 0:
            rec.t.append(final.t)
            rec.u.append(u.copy())
            rec.v.append(v.copy())
            rec.f.append(np.array(f_now, dtype=float))
        return final, (rec.build(dt, overflowed) if rec is not None else None)

    def linear_forcing(self, forcing: Optional[Sampler]):
        if forcing is None:
            return None
        theta, dt = self.cfg.theta, self.cfg.dt

        def step_forcing(k, t, u, v):
            return _as_field(forcing(t + theta * dt)), _as_field(forcing(t))

        return step_forcing

    @staticmethod
    def semilinear_forcing(kind: NonlinKind):
        def step_forcing(k, t, u, v):
            f, over = eval_f(kind, u, v)
            if over:
                return None, f
            return f, f

        return step_forcing

    def solve_linear(self, u0, u1, t: float, forcing: Optional[Sampler] = None, **kw):
        n = self.cfg.steps_to(t)
        return self.march(State(0.0, _as_field(u0), _as_field(u1)), n,
                          self.linear_forcing(forcing), **kw)

    def solve_semilinear(self, u0, u1, kind: NonlinKind, t: float, **kw):
        n = self.cfg.steps_to(t)
        return self.march(State(0.0, _as_field(u0), _as_field(u1)), n,
                          self.semilinear_forcing(kind), **kw)

    # propagators --------------------------------------------------------------
    def propagate_R(self, u0, u1, t: float) -> State:
        final, _ = self.solve_linear(u0, u1, t, store=False)
        return final

    def propagate_S(self, g, t: float) -> State:
        return self.propagate_R(self._zero, g, t)

    def duhamel_solve(self, u0, u1, forcing: Optional[Sampler], t: float) -> State:
        """Mild-solution formula by left-rectangle quadrature in ``s``.

        ``u(t) = R(t)(u0,u1) + sum_k dt * S(t - s_k) F(s_k)``, each term
        computed by its own propagation; quadratic cost in the step count.
        """
        n = self.cfg.steps_to(t)
        dt = self.cfg.dt
        out = self.propagate_R(u0, u1, t)
        if forcing is None:
            return out
        u = out.u.copy()
        v = out.v.copy()
        for k in range(n):
            s = k * dt
            g = _as_field(forcing(s)).copy()
            g[0] = g[-1] = 0.0
            if not np.any(g):
                continue
            part, _ = self.march(State(s, self._zero, g), n - k, store=False)
            u += dt * part.u
            v += dt * part.v
        return State(t, u, v)

    # energy -----------------------------------------------------------------
    def energy(self, u, v) -> float:
        """``0.5*(||v||^2 + ||d_r u||^2)`` with the face-difference gradient."""
        return 0.5 * (inner(self.grid, v, v) + face_gradient_sq(self.grid, u))

    def laplacian(self, g):
        return apply_laplacian(self.stencil, g)


def _as_field(a) -> NDArray[np.float64]:
    return np.ascontiguousarray(a, dtype=np.float64)


def step_linear(grid, state, forcing, cfg) -> State:
    return Evolver(grid, cfg).step_linear(state, forcing)


def propagate_R(grid, u0, u1, t, cfg) -> State:
    return Evolver(grid, cfg).propagate_R(u0, u1, t)


def propagate_S(grid, g, t, cfg) -> State:
    return Evolver(grid, cfg).propagate_S(g, t)


def duhamel_solve(grid, u0, u1, forcing, t, cfg) -> State:
    return Evolver(grid, cfg).duhamel_solve(u0, u1, forcing, t)


def step_semilinear(grid, state, kind, cfg) -> State:
    return Evolver(grid, cfg).step_semilinear(state, kind)


def time_derivative(ev: Evolver, g, t: float) -> NDArray[np.float64]:
    """One-sided difference ``(S(t+dt) g - S(t) g) / dt`` of the u-component."""
    dt = ev.cfg.dt
    a = ev.propagate_S(g, t)
    b, _ = ev.march(a, 1, store=False)
    return (b.u - a.u) / dt


def rs_relation_error(ev: Evolver, u0, u1, t: float) -> float:
    """Max-norm gap between ``R(t)(u0,u1)`` and ``S(t)(-Lap u0 + u1) + d_t S(t) u0``."""
    lhs = ev.propagate_R(u0, u1, t).u
    rhs = ev.propagate_S(-ev.laplacian(u0) + _as_field(u1), t).u + time_derivative(ev, u0, t)
    return float(np.max(np.abs(lhs - rhs)))
