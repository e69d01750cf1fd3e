"""Fixed-point construction of mild solutions and contraction measurement.

Iterate ``m + 1`` solves the linear forced problem whose forcing at step
``k`` is ``f(u^(m)_k, v^(m)_k)``, i.e. the previous iterate frozen and held
piecewise constant over each step.  The fixed point of this map is exactly
the direct semilinear march, which gives a cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigError, UsageError
from .evolver import Evolver, SolverConfig, State, Trajectory
from .grid import RadialGrid
from .nonlinearity import NonlinKind, eval_f

ABS_FLOOR = 1e-14

CONVERGED = "converged"
DIVERGED = "diverged"
LEFT_BALL = "left-ball"
OVERFLOW = "overflow"


@dataclass(frozen=True)
class PicardConfig:
    T: float
    R: float | None = None
    tol: float = 1e-10
    max_iter: int = 60

    def __post_init__(self):
        if not self.T > 0:
            raise ConfigError("T must be positive")
        if self.R is not None and not self.R > 0:
            raise ConfigError("R must be positive")
        if not 0 < self.tol <= 1e-2:
            raise ConfigError("tol must lie in (0, 1e-2]")
        if int(self.max_iter) != self.max_iter or self.max_iter < 2:
            raise ConfigError("max_iter must be an integer >= 2")


@dataclass
class IterateTrace:
    norms: list = field(default_factory=list)
    distances: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    status: str = DIVERGED
    R: float = 0.0

    @property
    def converged(self) -> bool:
        return self.status == CONVERGED

    @property
    def iterations(self) -> int:
        return len(self.distances)

    @property
    def max_ratio(self) -> float:
        return max(self.ratios) if self.ratios else 0.0

    def rows(self):
        """``(iteration, xt_norm, distance, ratio)``; ratio is NaN where undefined."""
        out = []
        for m, d in enumerate(self.distances):
            ratio = self.ratios[m - 1] if 1 <= m <= len(self.ratios) else math.nan
            out.append((m + 1, self.norms[m + 1], d, ratio))
        return out


def _pair_norms(ev: Evolver, u, v) -> np.ndarray:
    k = ev.kernels
    w, dx = ev.grid.quad_weights, ev.grid.dx
    return np.array([k.h1_pair_norm(np.ascontiguousarray(a), np.ascontiguousarray(b), w, dx)
                     for a, b in zip(u, v)])


def xt_norm(traj: Trajectory, grid: RadialGrid | None = None, ev: Evolver | None = None) -> float:
    """``max_k (||u_k||_{H^1} + ||v_k||_{H^1})`` over the stored steps."""
    if traj is None or len(traj) == 0:
        raise UsageError("empty trajectory")
    if ev is None:
        if grid is None:
            raise UsageError("xt_norm needs the grid")
        ev = _NormOnly(grid)
    return float(np.max(_pair_norms(ev, traj.u, traj.v)))


class _NormOnly:
    def __init__(self, grid):
        from ._backend import kernels

        self.grid = grid
        self.kernels = kernels


def _distance(ev, a: Trajectory, b: Trajectory) -> float:
    return float(np.max(_pair_norms(ev, a.u - b.u, a.v - b.v)))


def _frozen(kind: NonlinKind, prev: Trajectory):
    def step_forcing(k, t, u, v):
        f, over = eval_f(kind, prev.u[k], prev.v[k])
        return (None if over else f), f

    return step_forcing


def picard_iterate(grid: RadialGrid, u0, u1, kind: NonlinKind, pcfg: PicardConfig,
                   cfg: SolverConfig):
    """Iterate the mild-solution map on ``[0, T]``; returns ``(trajectory, trace)``.

    Stops on relative X(T)-distance ``<= tol`` (absolute floor 1e-14), on
    leaving the ball of radius ``2R``, on overflow, or after ``max_iter``.
    """
    ev = Evolver(grid, replace(cfg, store_every=1))
    n = ev.cfg.steps_to(pcfg.T)
    start = State(0.0, np.asarray(u0, dtype=float), np.asarray(u1, dtype=float))
    _, cur = ev.march(start, n, store_every=1)
    trace = IterateTrace()
    n_hom = xt_norm(cur, ev=ev)
    trace.R = pcfg.R if pcfg.R is not None else max(2.0 * n_hom, ABS_FLOOR)
    trace.norms.append(n_hom)
    for _ in range(pcfg.max_iter):
        _, nxt = ev.march(start, n, _frozen(kind, cur), store_every=1)
        if nxt.overflowed or not np.isfinite(nxt.u).all():
            trace.status = OVERFLOW
            return cur, trace
        norm = xt_norm(nxt, ev=ev)
        dist = _distance(ev, nxt, cur)
        trace.norms.append(norm)
        if trace.distances and trace.distances[-1] > ABS_FLOOR:
            trace.ratios.append(dist / trace.distances[-1])
        trace.distances.append(dist)
        cur = nxt
        if norm > 2.0 * trace.R:
            trace.status = LEFT_BALL
            return cur, trace
        if dist <= max(pcfg.tol * norm, ABS_FLOOR):
            trace.status = CONVERGED
            return cur, trace
    trace.status = DIVERGED
    return cur, trace


def direct_distance(grid: RadialGrid, traj: Trajectory, u0, u1, kind: NonlinKind,
                    cfg: SolverConfig) -> float:
    """X(T)-distance between a Picard fixed point and the direct semilinear march."""
    ev = Evolver(grid, replace(cfg, store_every=1))
    n = len(traj) - 1
    _, direct = ev.march(State(0.0, np.asarray(u0, float), np.asarray(u1, float)), n,
                         ev.semilinear_forcing(kind), store_every=1)
    return _distance(ev, traj, direct)


@dataclass
class HorizonReport:
    T: float
    found: bool
    trace: IterateTrace | None
    probes: list = field(default_factory=list)


def _contracts(trace: IterateTrace) -> bool:
    return trace.converged and all(r <= 0.5 for r in trace.ratios)


def find_contraction_horizon(grid: RadialGrid, u0, u1, kind: NonlinKind, cfg: SolverConfig,
                             T_max: float = 2.0, *, R: float | None = None, tol: float = 1e-10,
                             max_iter: int = 60) -> HorizonReport:
    """Largest tested ``T <= T_max`` whose iteration converges with all ratios <= 1/2.

    Bisection over whole step counts; ``found = False`` with ``T = 0`` when
    even a single step fails.
    """
    dt = cfg.dt
    hi = int(math.floor(T_max / dt + 1e-9))
    if hi < 1:
        raise ConfigError("T_max is shorter than one step")
    probes = []

    def probe(steps):
        pc = PicardConfig(T=steps * dt, R=R, tol=tol, max_iter=max_iter)
        _, tr = picard_iterate(grid, u0, u1, kind, pc, cfg)
        ok = _contracts(tr)
        probes.append((steps * dt, ok, tr.max_ratio, tr.status))
        return ok, tr

    ok, tr = probe(hi)
    if ok:
        return HorizonReport(hi * dt, True, tr, probes)
    ok, tr_lo = probe(1)
    if not ok:
        return HorizonReport(0.0, False, tr_lo, probes)
    lo = 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        ok, tr = probe(mid)
        if ok:
            lo, tr_lo = mid, tr
        else:
            hi = mid
    return HorizonReport(lo * dt, True, tr_lo, probes)
