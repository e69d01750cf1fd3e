"""Finite-time blow-up detection by norm escape.

Only escape of ``N(t) = ||u||_{H^1} + ||u_t||_{H^1}`` past a threshold is
observable.  On escape the tail of the run is repeated at a quarter of the
step, and on both levels the blow-up time is extrapolated from the ansatz
``N(t) ~ (T* - t)^(-kappa)``, i.e. ``N^(-1/kappa)`` linear in ``t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import ConfigError
from .evolver import Evolver, SolverConfig, State
from .grid import RadialGrid
from .harmonic import make_weight
from .nonlinearity import NonlinKind
from .testfn import sign_functional

GLOBAL = "GlobalUpTo"
BLOWUP = "BlowupAt"


@dataclass(frozen=True)
class Thresholds:
    """Detection parameters.

    ``factor`` scales the initial H^1 x H^1 norm into ``M_blow``; zero data
    fall back to ``floor``.  ``max_steps`` caps the coarse march (the run
    budget); ``None`` means ``t_end / dt`` steps.
    """

    factor: float = 1e6
    floor: float = 1e6
    early_factor: float = 1e3
    tail_fraction: float = 0.1
    refine: int = 4
    agree_rtol: float = 0.05
    max_steps: int | None = None

    def __post_init__(self):
        if not self.factor > 1 or not self.floor > 0:
            raise ConfigError("threshold factor must exceed 1 and floor must be positive")
        if not 0 < self.tail_fraction < 1:
            raise ConfigError("tail_fraction must lie in (0, 1)")
        if self.refine < 2:
            raise ConfigError("refine must be >= 2")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("max_steps must be positive")


@dataclass
class Verdict:
    tag: str
    t_end: float
    peak_norm: float
    t_est: float | None = None
    t_last_stable: float | None = None
    kappa: float | None = None
    refinement_confirmed: bool = False
    sign_functional: float | None = None
    t_first_large: float | None = None
    t_est_coarse: float | None = None

    @property
    def blew_up(self) -> bool:
        return self.tag == BLOWUP

    @property
    def status(self) -> str:
        if not self.blew_up:
            return "no blow-up observed within budget"
        return "confirmed" if self.refinement_confirmed else "suspected"

    def to_dict(self) -> dict:
        return {
            "tag": self.tag,
            "t_est": self.t_est,
            "t_last_stable": self.t_last_stable,
            "kappa": self.kappa,
            "peak_norm": self.peak_norm,
            "refinement_confirmed": self.refinement_confirmed,
            "sign_functional": self.sign_functional,
        }


@dataclass
class _History:
    t: list = field(default_factory=list)
    norm: list = field(default_factory=list)


def _pair_norm(ev: Evolver, u, v) -> float:
    return float(ev.kernels.h1_pair_norm(u, v, ev.grid.quad_weights, ev.grid.dx))


def _run(ev: Evolver, state: State, kind, n_steps, m_blow):
    hist = _History()
    forcing = None if kind is None else ev.semilinear_forcing(kind)

    def observe(t, u, v, f):
        hist.t.append(t)
        hist.norm.append(_pair_norm(ev, u, v))

    def stop(t, u, v):
        return not hist.norm[-1] < m_blow

    final, _ = ev.march(state, n_steps, forcing, store=False, observe=observe, stop=stop)
    crossed = final.overflowed or not hist.norm[-1] < m_blow
    return final, hist, crossed


def _clean(hist: _History):
    t = np.asarray(hist.t)
    y = np.asarray(hist.norm)
    ok = np.isfinite(y)
    return t[ok], y[ok]


def fit_blowup_time(t, norm, m_blow: float):
    """Fit ``norm^(-1/kappa) = a + b t`` over the last decade below ``m_blow``.

    Returns ``(t_est, kappa)``; ``kappa`` minimizes the relative misfit.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(norm, dtype=float)
    top = min(float(y.max()), m_blow)
    sel = y >= top / 10.0
    if sel.sum() < 4:
        sel = np.zeros_like(sel)
        sel[-min(len(y), 4):] = True
    ts, ys = t[sel], y[sel]
    if len(ts) < 3:
        return float(ts[-1]), math.nan
    logy = np.log(ys)

    def misfit(log_kappa):
        z = np.exp(-(logy - logy[0]) / math.exp(log_kappa))
        coef = np.polyfit(ts, z, 1)
        r = z - np.polyval(coef, ts)
        return float(r @ r) / float(np.ptp(z) ** 2 + 1e-300)

    res = minimize_scalar(misfit, bounds=(math.log(0.02), math.log(50.0)), method="bounded",
                          options={"xatol": 1e-6})
    kappa = math.exp(res.x)
    z = np.exp(-(logy - logy[0]) / kappa)
    b, a = np.polyfit(ts, z, 1)
    t_est = -a / b if b < 0 else math.inf
    return float(max(t_est, ts[-1])), float(kappa)


def detect(grid: RadialGrid, u0, u1, kind: NonlinKind | None, cfg: SolverConfig,
           thresholds: Thresholds | None = None) -> Verdict:
    """March the semilinear problem and classify the outcome.

    ``kind = None`` runs the linear problem (no forcing).
    """
    th = thresholds or Thresholds()
    ev = Evolver(grid, cfg)
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    sign = sign_functional(u1, make_weight(grid))
    n0 = _pair_norm(ev, u0, u1)
    m_blow = th.factor * n0 if n0 > 0 else th.floor
    n_steps = cfg.steps_to(cfg.t_end)
    if th.max_steps is not None:
        n_steps = min(n_steps, th.max_steps)
    start = State(0.0, u0, u1)
    final, hist, crossed = _run(ev, start, kind, n_steps, m_blow)
    t_c, y_c = _clean(hist)
    peak = float(y_c.max()) if len(y_c) else 0.0
    if not crossed:
        return Verdict(GLOBAL, float(final.t), peak, t_last_stable=float(final.t),
                       sign_functional=sign)

    early = th.early_factor * n0 if n0 > 0 else th.floor
    big = np.nonzero(y_c >= early)[0]
    t_first_large = float(t_c[big[0]]) if len(big) else None
    t_est_c, _ = fit_blowup_time(t_c, y_c, m_blow)

    # repeat the tail at dt / refine from the coarse state at 90% of the crossing time
    k_cross = len(hist.t) - 1
    k_tail = int(math.floor((1.0 - th.tail_fraction) * k_cross))
    tail_start, _ = ev.march(start, k_tail, None if kind is None else ev.semilinear_forcing(kind),
                             store=False)
    fine = ev.with_dt(cfg.dt / th.refine)
    budget = th.refine * (n_steps - k_tail)
    _, hist_f, crossed_f = _run(fine, tail_start, kind, budget, m_blow)
    t_f, y_f = _clean(hist_f)
    peak = max(peak, float(y_f.max()) if len(y_f) else 0.0)
    stable = t_f[y_f < m_blow]
    t_last = float(stable[-1]) if len(stable) else float(tail_start.t)
    if crossed_f:
        t_est, kappa = fit_blowup_time(t_f, y_f, m_blow)
    else:
        t_est, kappa = math.inf, math.nan
    t_est = max(t_est, t_last)
    confirmed = bool(crossed_f and math.isfinite(t_est)
                     and abs(t_est - t_est_c) <= th.agree_rtol * abs(t_est))
    return Verdict(BLOWUP, cfg.t_end, peak, t_est=t_est, t_last_stable=t_last,
                   kappa=kappa, refinement_confirmed=confirmed, sign_functional=sign,
                   t_first_large=t_first_large, t_est_coarse=t_est_c)


def amplitude_threshold_scan(grid: RadialGrid, u0, u1, kind, cfg: SolverConfig, amplitudes,
                             thresholds: Thresholds | None = None):
    """Run :func:`detect` on ``(A*u0, A*u1)`` for each amplitude ``A``."""
    u0 = np.asarray(u0, dtype=float)
    u1 = np.asarray(u1, dtype=float)
    return [(float(a), detect(grid, a * u0, a * u1, kind, cfg, thresholds)) for a in amplitudes]
