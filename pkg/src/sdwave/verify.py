"""Verification suites shared by the ``verify`` command and the test-suite.

Each suite returns a :class:`SuiteResult` with one line per check.  The
manufactured problems use ``u*(t, r) = a(t) s(r)`` with
``s = sin(pi (r - r_obs) / (r_out - r_obs))``.
"""

from __future__ import annotations

import math
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .blowup import detect
from .diagnostics import (
    Recorder,
    check_displacement_bound,
    check_energy_bound,
    check_velocity_gradient_bound,
    energy_identity_residual,
    energy_violations,
)
from .evolver import Evolver, SolverConfig, rs_relation_error
from .grid import DomainSpec, build_grid, l2_norm
from .harmonic import laplacian_residual, make_weight, phi0_dr, residual_order
from .nonlinearity import NonlinKind, power_difference_bound_check
from .picard import PicardConfig, direct_distance, find_contraction_horizon, picard_iterate
from .profiles import make_profile
from .sweep import SweepPlan, phase_diagram_export, run_sweep
from .testfn import make_cutoffs, scaling_slope, weak_form_residual
from .theory import brute_force_grid, constants, in_blowup_region_mixed


@dataclass
class SuiteResult:
    name: str
    lines: list = field(default_factory=list)
    passed: bool = True
    data: dict = field(default_factory=dict)

    def check(self, ok: bool, text: str):
        self.lines.append(("PASS " if ok else "FAIL ") + text)
        self.passed &= bool(ok)
        return ok

    def info(self, text: str):
        self.lines.append("     " + text)


def _order(errs):
    return [math.log2(errs[i] / errs[i + 1]) for i in range(len(errs) - 1)]


def _domain(n, r_out):
    return DomainSpec(n, 0.0 if n == 1 else 1.0, r_out)


# manufactured problem ----------------------------------------------------------
def _amp(t):
    return math.sin(2 * t + 0.3), 2 * math.cos(2 * t + 0.3), -4 * math.sin(2 * t + 0.3)


def _shape(grid):
    a, b = grid.spec.r_obs, grid.spec.r_out
    k = math.pi / (b - a)
    r = grid.nodes
    s = np.sin(k * (r - a))
    s1 = k * np.cos(k * (r - a))
    lap = -k * k * s
    if grid.n > 1:
        lap = lap + (grid.n - 1) * s1 / r
    return s, lap


def mms_error(n, j_max, dt, T=1.0, theta=0.5, r_out=None, discrete=False):
    """L2 error at ``T`` of the manufactured solution.

    ``discrete=True`` builds the forcing with the discrete Laplacian, which
    removes the spatial error and isolates the time-stepping error.
    """
    g = build_grid(_domain(n, r_out or (4.0 if n == 1 else 5.0)), j_max)
    ev = Evolver(g, SolverConfig(dt=dt, theta=theta))
    s, lap = _shape(g)
    if discrete:
        lap = ev.laplacian(s)
    s = s.copy()
    s[0] = s[-1] = 0.0

    def forcing(t):
        a, a1, a2 = _amp(t)
        f = a2 * s - (a + a1) * lap
        f[0] = f[-1] = 0.0
        return f

    a0, a1, _ = _amp(0.0)
    fin, _ = ev.solve_linear(a0 * s, a1 * s, T, forcing, store=False)
    return l2_norm(g, fin.u - _amp(T)[0] * s)


# suites -------------------------------------------------------------------------
def suite_constants() -> SuiteResult:
    res = SuiteResult("constants")
    c = constants()
    res.check(c.residual1 <= 1e-12, f"alpha1 = {c.alpha1:.15g}, |2a^2 - a - 2| = {c.residual1:.3g}")
    res.check(c.residual2 <= 1e-12, f"alpha2 = {c.alpha2:.15g}, |a^2 - a - 1| = {c.residual2:.3g}")
    res.check(round(1 + c.alpha1, 2) == 2.28, f"1 + alpha1 = {1 + c.alpha1:.10f} (~2.28)")
    res.check(round(0.5 * (1 + c.alpha2), 1) == 1.3, f"(1 + alpha2)/2 = {0.5 * (1 + c.alpha2):.10f} (~1.3)")
    return res


def suite_regions(size: int = 200, n_alpha: int = 1_000_000) -> SuiteResult:
    res = SuiteResult("regions")
    ps = np.linspace(1.0, 4.0, size + 1)[1:]
    qs = np.linspace(1.0, 2.0, size + 1)[1:]
    brute = brute_force_grid(ps, qs, n_alpha)
    analytic = np.array([[in_blowup_region_mixed(1, p, q).inside for q in qs] for p in ps])
    bad = int(np.sum(brute != analytic))
    res.check(bad == 0, f"half-line mixed region: {bad} disagreements on {size}x{size} grid "
              f"(alpha scan of {n_alpha} points)")
    res.data["disagreements"] = bad
    return res


def suite_harmonic() -> SuiteResult:
    res = SuiteResult("harmonic")
    w1 = make_weight(build_grid(_domain(1, 10.0), 200))
    r1 = laplacian_residual(w1)
    res.check(r1 <= 1e-12, f"n=1 discrete Laplacian residual {r1:.3g} <= 1e-12")
    for n in (2, 3):
        a, b, order = residual_order(_domain(n, 10.0), 400)
        res.check(abs(order - 2.0) <= 0.2, f"n={n} residual {a:.3g} -> {b:.3g}, order {order:.3f}")
    for n in (1, 2, 3):
        w = make_weight(build_grid(_domain(n, 10.0), 100))
        res.check(w.values[0] == 0.0, f"n={n} boundary value exactly 0")
    g3 = build_grid(DomainSpec(3, 1.5, 12.0), 200)
    r = g3.nodes
    prod = np.abs(phi0_dr(r, 3, 1.5)) * r**2
    err = float(np.max(np.abs(prod - 1.5)))
    res.check(err <= 1e-10, f"n=3 |d_r phi0| r^2 = (n-2) r_obs^(n-2) within {err:.3g}")
    return res


def suite_energy_decay() -> SuiteResult:
    res = SuiteResult("energy-decay")
    total = 0
    for n in (1, 2, 3):
        g = build_grid(_domain(n, 20.0), 200)
        for theta in (0.5, 1.0):
            ev = Evolver(g, SolverConfig(dt=0.05, theta=theta))
            for prof in ("sigma", "cinf", "gaussian"):
                u0 = make_profile(g, prof)
                u1 = make_profile(g, prof, -0.5, center=g.spec.r_obs + 6.0)
                rec = Recorder(g, ev.cfg.dt)
                ev.solve_linear(u0, u1, 10.0, store=False, observe=rec.observe)
                total += energy_violations(rec.series())
    res.check(total == 0, f"energy increases with F = 0 over 18 runs x 200 steps: {total}")
    return res


def suite_energy_identity() -> SuiteResult:
    res = SuiteResult("energy-identity")
    for forced in (False, True):
        errs = []
        for j, dt in ((100, 1 / 16), (200, 1 / 32), (400, 1 / 64)):
            g = build_grid(_domain(1, 12.0), j)
            ev = Evolver(g, SolverConfig(dt=dt))
            u1 = make_profile(g)
            bump = make_profile(g, "cinf", center=6.0, width=1.5)
            rec = Recorder(g, dt)
            forcing = (lambda t: math.cos(t) * bump) if forced else None
            ev.solve_linear(0.5 * u1, u1, 2.0, forcing, store=False, observe=rec.observe)
            errs.append(energy_identity_residual(rec.series()).max_abs)
        order = _order(errs)[-1]
        res.check(order >= 1.0, f"{'forced' if forced else 'homogeneous'} energy identity "
                  f"residual {errs[0]:.3g} -> {errs[-1]:.3g}, order {order:.2f} >= 1")
    return res


def suite_mms() -> SuiteResult:
    res = SuiteResult("manufactured")
    for n in (1, 3):
        ex = [mms_error(n, j, 0.002, T=0.5) for j in (32, 64, 128)]
        ox = _order(ex)[-1]
        res.check(abs(ox - 2.0) <= 0.3, f"n={n} spatial order {ox:.3f} (errors {ex[0]:.3g} -> {ex[-1]:.3g})")
        et = [mms_error(n, 64, dt, discrete=True) for dt in (1 / 16, 1 / 32, 1 / 64)]
        ot = _order(et)[-1]
        res.check(abs(ot - 2.0) <= 0.3, f"n={n} temporal order {ot:.3f} (errors {et[0]:.3g} -> {et[-1]:.3g})")
    return res


def suite_duhamel() -> SuiteResult:
    res = SuiteResult("duhamel")
    g = build_grid(_domain(1, 10.0), 100)
    u0 = make_profile(g, "cinf", 0.5)
    u1 = make_profile(g)
    bump = make_profile(g, "sigma", center=5.0, width=1.5)

    def forcing(t):
        return math.cos(3 * t) * bump

    diffs, rs = [], []
    for dt in (1 / 16, 1 / 32, 1 / 64):
        ev = Evolver(g, SolverConfig(dt=dt))
        direct, _ = ev.solve_linear(u0, u1, 1.0, forcing, store=False)
        mild = ev.duhamel_solve(u0, u1, forcing, 1.0)
        diffs.append(l2_norm(g, direct.u - mild.u))
        rs.append(rs_relation_error(ev, u0, u1, 1.0))
    od = _order(diffs)
    res.check(all(abs(o - 1.0) <= 0.3 for o in od),
              f"Duhamel vs march gap {diffs[0]:.3g} -> {diffs[-1]:.3g}, orders "
              + ", ".join(f"{o:.2f}" for o in od))
    ors = _order(rs)
    tol = rs[-2] * 2.0 ** -0.7
    res.check(rs[-1] <= tol and all(o >= 0.7 for o in ors),
              f"R/S relation error {rs[0]:.3g} -> {rs[-1]:.3g} (tolerance {tol:.3g} from refinement), orders "
              + ", ".join(f"{o:.2f}" for o in ors))
    return res


def suite_picard() -> SuiteResult:
    res = SuiteResult("picard")
    g = build_grid(_domain(1, 20.0), 200)
    u1 = make_profile(g)
    u0 = np.zeros_like(u1)
    kind = NonlinKind.mixed(2, 2)
    cfg = SolverConfig(dt=0.02)
    rep = find_contraction_horizon(g, u0, u1, kind, cfg, T_max=4.0)
    ratios = rep.trace.ratios if rep.trace else []
    res.check(rep.found and rep.T > 0 and all(r <= 0.5 for r in ratios),
              f"contraction horizon T = {rep.T:.4g}, max ratio {max(ratios, default=0):.3f} <= 1/2")
    pc = PicardConfig(T=rep.T)
    traj, tr = picard_iterate(g, u0, u1, kind, pc, cfg)
    d = direct_distance(g, traj, u0, u1, kind, cfg) / max(tr.norms[-1], 1e-300)
    res.check(tr.converged and d <= 5 * pc.tol,
              f"fixed point vs direct march: relative X(T) distance {d:.3g} <= {5 * pc.tol:.1g}")
    res.data.update(T=rep.T, trace=tr)
    return res


def suite_estimates() -> SuiteResult:
    res = SuiteResult("estimates")
    checks = (check_energy_bound, check_displacement_bound, check_velocity_gradient_bound)
    for label, data in (("zero data", False), ("bump data", True)):
        sups = []
        for j, dt in ((120, 1 / 16), (240, 1 / 32)):
            g = build_grid(_domain(3, 12.0), j)
            ev = Evolver(g, SolverConfig(dt=dt))
            bump = make_profile(g, "sigma", center=6.0, width=1.5)
            u1 = make_profile(g) if data else np.zeros(g.size)
            rec = Recorder(g, dt)
            ev.solve_linear(0.5 * u1, u1, 4.0, lambda t: (1.0 + math.sin(t)) * bump, store=False,
                            observe=rec.observe)
            s = rec.series()
            sups.append([fn(s) for fn in checks])
        for i in range(len(checks)):
            name = sups[0][i].name
            a, b = sups[0][i].sup_ratio, sups[1][i].sup_ratio
            ok = math.isfinite(a) and math.isfinite(b) and abs(b - a) <= 0.1 * abs(a)
            res.check(ok, f"{label}: {name} bound sup ratio {a:.5g} -> {b:.5g} under halving")
    return res


def suite_weak() -> SuiteResult:
    res = SuiteResult("weak-form")
    for n in (1, 3):
        errs = []
        for j, dt in ((64, 1 / 16), (128, 1 / 32), (256, 1 / 64)):
            g = build_grid(_domain(n, 8.0 if n == 1 else 9.0), j)
            ev = Evolver(g, SolverConfig(dt=dt))
            s, lap = _shape(g)

            def forcing(t, s=s, lap=lap):
                a, a1, a2 = _amp(t)
                return a2 * s - (a + a1) * lap

            a0, a1, _ = _amp(0.0)
            _, traj = ev.solve_linear(a0 * s, a1 * s, 2.0, forcing)
            c = make_cutoffs(2.0, 4, 4, 1.0, n)
            errs.append(abs(weak_form_residual(traj, None, c, make_weight(g)).weak_residual))
        order = _order(errs)[-1]
        res.check(order >= 1.7, f"n={n} weak residual {errs[0]:.3g} -> {errs[-1]:.3g}, order {order:.2f}")
    return res


SLOPE_CASES = ((3, 2.0, 1.0), (3, 4.0 / 3.0, 1.0), (2, 1.25, 1.0), (2, 2.0, 1.0),
               (1, 2.0, 1.0), (1, 1.2, 1.5))


def suite_slopes() -> SuiteResult:
    res = SuiteResult("scaling-slopes")
    reports = []
    for n, q, alpha in SLOPE_CASES:
        rep = scaling_slope("I1", n, q, [8, 16, 32, 64], alpha=alpha)
        reports.append(rep)
        tag = " (ln-corrected)" if rep.log_corrected else ""
        res.check(abs(rep.slope - rep.expected) <= 0.15,
                  f"n={n} q={q:.4g} alpha={alpha:g}: I1 slope {rep.slope:.4f} vs {rep.expected:.4f}{tag}")
    res.data["reports"] = reports
    return res


def suite_inequality() -> SuiteResult:
    res = SuiteResult("inequality")
    for r in (1.5, 2.0, 3.0):
        rep = power_difference_bound_check(r, 100_000, seed=0)
        res.check(rep.holds, f"r={r:g}: max ratio {rep.max_ratio:.6f} <= 1 over 1e5 pairs")
    return res


BLOWUP_GRID = dict(r_out=40.0, j_max=400)
BLOWUP_SOLVER = dict(dt=0.0125, t_end=20.0)


def blowup_case(n, kind, amplitude):
    g = build_grid(_domain(n, BLOWUP_GRID["r_out"]), BLOWUP_GRID["j_max"])
    u1 = make_profile(g, amplitude=amplitude)
    return detect(g, np.zeros_like(u1), u1, kind, SolverConfig(**BLOWUP_SOLVER))


def suite_blowup() -> SuiteResult:
    res = SuiteResult("blowup")
    for n, kind, amp in ((1, NonlinKind.derivative(1.2), 1.0), (1, NonlinKind.mixed(2, 1.2), 1.0),
                         (3, NonlinKind.derivative(1.25), 1.0)):
        v = blowup_case(n, kind, amp)
        res.check(v.blew_up and v.refinement_confirmed and v.sign_functional > 0,
                  f"n={n} {kind.kind.value} p={kind.p} q={kind.q} A={amp:g}: {v.tag} "
                  f"t_est={v.t_est}, kappa={v.kappa}, {v.status}, sign {v.sign_functional:.4g}")
    for n, kind, amp in ((3, NonlinKind.derivative(3.0), 0.1), (1, NonlinKind.derivative(3.0), 0.01),
                         (1, NonlinKind.mixed(5.0, 3.0), 0.01)):
        v = blowup_case(n, kind, amp)
        res.check(not v.blew_up, f"n={n} {kind.kind.value} p={kind.p} q={kind.q} A={amp:g}: "
                  f"{v.tag}({v.t_end:g}), {v.status}")
    return res


def suite_determinism() -> SuiteResult:
    res = SuiteResult("determinism")
    plan = SweepPlan(n=1, kind="mixed", p_grid=(1.5, 2.5, 3.5), q_grid=(1.2, 1.6, 2.0),
                     amplitudes=(0.5, 2.0), t_end=10.0, j_max=200)
    blobs = []
    with tempfile.TemporaryDirectory() as tmp:
        for i, workers in enumerate((1, 2, 1)):
            out = Path(tmp) / f"run{i}"
            files = phase_diagram_export(run_sweep(plan, workers=workers), out)
            blobs.append({p.name: p.read_bytes() for p in files})
    res.check(blobs[0] == blobs[1] == blobs[2],
              f"sweep outputs byte-identical across workers (1, 2, 1): {sorted(blobs[0])}")
    return res


SUITES = {
    "constants": suite_constants,
    "regions": suite_regions,
    "harmonic": suite_harmonic,
    "energy-decay": suite_energy_decay,
    "energy-identity": suite_energy_identity,
    "manufactured": suite_mms,
    "duhamel": suite_duhamel,
    "picard": suite_picard,
    "estimates": suite_estimates,
    "weak-form": suite_weak,
    "scaling-slopes": suite_slopes,
    "inequality": suite_inequality,
    "blowup": suite_blowup,
    "determinism": suite_determinism,
}

# the light suites run by ``verify --suite all``
DEFAULT_SUITES = ("constants", "harmonic", "energy-identity", "weak-form", "scaling-slopes", "inequality")
