"""Phase-diagram sweeps over the exponents ``(p, q)``.

Each grid point and amplitude is an independent blow-up detection.  Runs
execute in worker processes; results are placed into slots fixed by their
grid index, so the aggregate does not depend on scheduling.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .blowup import Thresholds, detect
from .errors import ConfigError
from .evolver import SolverConfig
from .grid import DomainSpec, build_grid
from .io import OutputWriter
from .nonlinearity import NonlinKind
from .profiles import make_profile
from .theory import in_blowup_region_derivative, in_blowup_region_mixed, overlay_polylines


@dataclass(frozen=True)
class SweepPlan:
    n: int
    kind: str
    p_grid: tuple = ()
    q_grid: tuple = ()
    amplitudes: tuple = (0.5, 1.0, 2.0, 5.0, 10.0)
    profile: str = "sigma"
    r_obs: float | None = None
    r_out: float = 40.0
    j_max: int = 400
    dt: float = 0.0125
    t_end: float = 20.0
    max_steps: int | None = None
    local_theory: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.kind not in ("derivative", "mixed"):
            raise ConfigError(f"sweeps cover derivative or mixed nonlinearities, got {self.kind!r}")
        for name in ("p_grid", "q_grid", "amplitudes"):
            vals = tuple(float(x) for x in getattr(self, name))
            object.__setattr__(self, name, vals)
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise ConfigError(f"{name} must be strictly increasing")
        if self.r_obs is None:
            object.__setattr__(self, "r_obs", 0.0 if self.n == 1 else 1.0)
        if self.kind == "derivative" and self.p_grid:
            raise ConfigError("derivative sweeps take no p_grid")
        if any(e <= 1.0 for e in self.p_grid + self.q_grid):
            raise ConfigError("exponents must exceed 1")
        if any(a <= 0 for a in self.amplitudes):
            raise ConfigError("amplitudes must be positive")
        if self.local_theory and self.n >= 3:
            bound = self.n / (self.n - 2)
            if any(e > bound for e in self.p_grid + self.q_grid):
                raise ConfigError(f"exponents exceed n/(n-2) = {bound:.6g}")
        if self.max_steps is not None and self.max_steps < 1:
            raise ConfigError("budget (max_steps) must be positive")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        DomainSpec(self.n, self.r_obs, self.r_out)
        SolverConfig(self.dt, 0.5, self.t_end)

    @classmethod
    def from_config(cls, cfg) -> "SweepPlan":
        return cls(n=cfg.n, kind=cfg.kind, p_grid=cfg.p_grid if cfg.kind == "mixed" else (),
                   q_grid=cfg.q_grid, amplitudes=cfg.amplitudes, profile=cfg.profile,
                   r_obs=cfg.r_obs, r_out=cfg.r_out, j_max=cfg.j_max, dt=cfg.dt,
                   t_end=cfg.t_end, max_steps=cfg.max_steps, workers=cfg.workers)

    def points(self):
        """``(p, q)`` pairs in row-major order (``p`` outer); ``p`` is None for derivative sweeps."""
        ps = self.p_grid if self.kind == "mixed" else (None,)
        if not self.q_grid or not ps:
            return []
        return list(itertools.product(ps, self.q_grid))

    def tasks(self):
        return [(i, p, q, a) for i, ((p, q), a) in
                enumerate(itertools.product(self.points(), self.amplitudes))]


@dataclass
class RunRecord:
    index: int
    p: float | None
    q: float
    amplitude: float
    tag: str
    t_est: float | None
    t_last_stable: float | None
    kappa: float | None
    peak_norm: float
    refinement_confirmed: bool
    sign_functional: float
    theory_inside: bool
    theory_boundary: bool
    error: str = ""

    @property
    def blew_up(self) -> bool:
        return self.tag == "BlowupAt"

    @property
    def label(self) -> str:
        if self.error:
            return "error"
        if not self.blew_up:
            return "no-blowup-within-budget"
        if not self.theory_inside:
            return "beyond-theory-observation"
        if self.sign_functional > 0:
            return "theory-consistent-blowup"
        return "blowup-without-sign-condition"


@dataclass
class SweepResult:
    plan: SweepPlan
    runs: list = field(default_factory=list)

    def agreement(self) -> dict:
        """Per ``(p, q)``: theory blow-up implies observed blow-up at some amplitude."""
        out = {}
        for pt in self.plan.points():
            rs = [r for r in self.runs if (r.p, r.q) == pt]
            if not rs:
                continue
            inside = rs[0].theory_inside
            out[pt] = (not inside) or any(r.blew_up and r.sign_functional > 0 for r in rs)
        return out

    def agreement_rate(self) -> float:
        """Fraction of theory blow-up points where blow-up was observed."""
        flags = [ok for pt, ok in self.agreement().items() if self._inside(pt)]
        return sum(flags) / len(flags) if flags else math.nan

    def _inside(self, pt) -> bool:
        return any(r.theory_inside for r in self.runs if (r.p, r.q) == pt)


def theory_membership(n: int, kind: str, p, q):
    m = in_blowup_region_derivative(n, q) if kind == "derivative" else in_blowup_region_mixed(n, p, q)
    return m.inside, m.boundary


def _run_one(args):
    plan, (index, p, q, amp) = args
    inside, boundary = theory_membership(plan.n, plan.kind, p, q)
    try:
        grid = build_grid(DomainSpec(plan.n, plan.r_obs, plan.r_out), plan.j_max)
        kind = NonlinKind.derivative(q) if plan.kind == "derivative" else NonlinKind.mixed(p, q)
        u1 = make_profile(grid, plan.profile, amp)
        cfg = SolverConfig(plan.dt, 0.5, plan.t_end)
        v = detect(grid, np.zeros_like(u1), u1, kind, cfg, Thresholds(max_steps=plan.max_steps))
    except Exception as exc:  # recorded in place; a sweep never aborts wholesale
        return RunRecord(index, p, q, amp, "error", None, None, None, math.nan, False,
                         math.nan, inside, boundary, f"{type(exc).__name__}: {exc}")
    return RunRecord(index, p, q, amp, v.tag, v.t_est, v.t_last_stable, v.kappa, v.peak_norm,
                     v.refinement_confirmed, v.sign_functional, inside, boundary)


def run_sweep(plan: SweepPlan, workers: int | None = None) -> SweepResult:
    tasks = plan.tasks()
    w = plan.workers if workers is None else workers
    slots: list = [None] * len(tasks)
    jobs = [(plan, t) for t in tasks]
    if w <= 1 or len(tasks) <= 1:
        for rec in map(_run_one, jobs):
            slots[rec.index] = rec
    else:
        with ProcessPoolExecutor(max_workers=w) as pool:
            for rec in pool.map(_run_one, jobs, chunksize=max(1, len(jobs) // (4 * w))):
                slots[rec.index] = rec
    return SweepResult(plan, slots)


PHASE_COLUMNS = (
    "index", "p", "q", "amplitude", "tag", "label", "t_est", "t_last_stable", "kappa",
    "peak_norm", "refinement_confirmed", "sign_functional", "theory_inside",
    "theory_boundary", "error",
)

PLOT_SCRIPT = '''"""Phase diagram from phase.csv and overlay.csv (needs matplotlib)."""
import csv
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name), encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


header, rows = read("phase.csv")
col = {{name: i for i, name in enumerate(header)}}
fig, ax = plt.subplots()
for label, marker in (("theory-consistent-blowup", "o"), ("beyond-theory-observation", "s"),
                      ("no-blowup-within-budget", "x"), ("blowup-without-sign-condition", "^"),
                      ("error", "*")):
    pts = [r for r in rows if r[col["label"]] == label]
    if pts:
        xs = [float(r[col["p"]]) if r[col["p"]] else 0.0 for r in pts]
        ys = [float(r[col["q"]]) for r in pts]
        ax.scatter(xs, ys, marker=marker, label=label)
_, lines = read("overlay.csv")
for name in sorted({{r[0] for r in lines}}):
    seg = [(float(r[2]), float(r[3])) for r in lines if r[0] == name]
    ax.plot([s[0] for s in seg], [s[1] for s in seg], "k-", lw=1)
ax.set_xlabel("{xlabel}")
ax.set_ylabel("q")
ax.legend(fontsize="small")
plt.show()
'''


def phase_rows(result: SweepResult):
    rows = []
    for r in result.runs:
        rows.append((r.index, r.p, r.q, r.amplitude, r.tag, r.label, r.t_est, r.t_last_stable,
                     r.kappa, r.peak_norm, r.refinement_confirmed, r.sign_functional,
                     r.theory_inside, r.theory_boundary, r.error.replace(",", ";")))
    return rows


def phase_diagram_export(result: SweepResult, directory, writer: OutputWriter | None = None):
    """Write ``phase.csv``, ``overlay.csv`` and ``plot_phase.py``; returns the paths."""
    w = writer or OutputWriter(directory)
    plan = result.plan
    w.csv("phase.csv", PHASE_COLUMNS, phase_rows(result))
    p_range = (min(plan.p_grid), max(plan.p_grid)) if plan.p_grid else (1.0, 4.0)
    q_range = (1.0, max(plan.q_grid)) if plan.q_grid else (1.0, 2.0)
    lines = overlay_polylines(plan.n, plan.kind, p_range, q_range)
    rows = [(name, i, x, y) for name, pts in sorted(lines.items()) for i, (x, y) in enumerate(pts)]
    w.csv("overlay.csv", ("polyline", "vertex", "p", "q"), rows)
    xlabel = "p" if plan.kind == "mixed" else "(unused)"
    w.text("plot_phase.py", PLOT_SCRIPT.format(xlabel=xlabel))
    return list(w.written)


__all__ = ["SweepPlan", "SweepResult", "RunRecord", "run_sweep", "phase_diagram_export"]
