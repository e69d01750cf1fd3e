"""Command-line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 numeric failure,
3 verification failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace

import numpy as np

from . import __version__
from .blowup import detect
from .diagnostics import (
    Recorder,
    check_displacement_bound,
    check_energy_bound,
    check_velocity_gradient_bound,
    energy_identity_residual,
)
from .errors import ConfigError, NumericError, UsageError
from .evolver import Evolver, State
from .io import OutputWriter, RunConfig, write_outputs
from .picard import PicardConfig, find_contraction_horizon, picard_iterate
from .sweep import SweepPlan, phase_diagram_export, run_sweep
from .theory import constants, in_blowup_region_derivative, in_blowup_region_mixed
from .verify import DEFAULT_SUITES, SUITES

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sdwave", description="Semilinear strongly damped waves on exterior domains.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="single evolution with diagnostics and a blow-up verdict")
    run.add_argument("--config", required=True)
    run.add_argument("--out", help="output directory (overrides config and environment)")

    pic = sub.add_parser("picard", help="fixed-point construction and contraction trace")
    pic.add_argument("--config", required=True)
    pic.add_argument("--T", type=float, help="horizon; default: search for the contraction horizon")
    pic.add_argument("--T-max", type=float, default=2.0, dest="t_max")
    pic.add_argument("--tol", type=float, default=1e-10)
    pic.add_argument("--out")

    ver = sub.add_parser("verify", help="run verification suites")
    ver.add_argument("--suite", default="all", choices=["all", "full", *SUITES],
                     help="'all' runs the light suites, 'full' every suite")

    sw = sub.add_parser("sweep", help="phase-diagram sweep over (p, q)")
    sw.add_argument("--config", required=True)
    sw.add_argument("--workers", type=int)
    sw.add_argument("--out")

    th = sub.add_parser("theory", help="region membership and constants")
    th.add_argument("--n", type=int)
    th.add_argument("--kind", choices=["derivative", "mixed"], default="derivative")
    th.add_argument("--p", type=float)
    th.add_argument("--q", type=float)
    th.add_argument("--constants", action="store_true")
    return p


def _load(args) -> RunConfig:
    cfg = RunConfig.load(args.config).with_env()
    if getattr(args, "out", None):
        cfg = replace(cfg, output_dir=args.out)
    return cfg


def _cmd_run(args) -> int:
    cfg = _load(args).validate()
    grid = cfg.grid()
    u0, u1 = cfg.data(grid)
    kind = cfg.nonlinearity()
    solver = cfg.solver()
    th = cfg.thresholds()
    verdict = detect(grid, u0, u1, kind, solver, th)

    ev = Evolver(grid, solver)
    rec = Recorder(grid, solver.dt, solver.store_every)
    def pair_norm(u, v):
        return float(ev.kernels.h1_pair_norm(u, v, grid.quad_weights, grid.dx))

    n0 = pair_norm(u0, u1)
    m_blow = th.factor * n0 if n0 > 0 else th.floor
    n_steps = solver.steps_to(solver.t_end)
    if th.max_steps is not None:
        n_steps = min(n_steps, th.max_steps)
    forcing = None if kind is None else ev.semilinear_forcing(kind)
    start = State(0.0, np.asarray(u0, dtype=float), np.asarray(u1, dtype=float))
    ev.march(start, n_steps, forcing, store=False, observe=rec.observe,
             stop=lambda t, u, v: pair_norm(u, v) >= m_blow)
    series = rec.series()
    est = {
        "energy_forced": check_energy_bound(series).sup_ratio,
        "l2_displacement": check_displacement_bound(series).sup_ratio,
        "velocity_gradient": check_velocity_gradient_bound(series).sup_ratio,
    }
    if solver.store_every == 1 and len(series) > 1:
        ident = energy_identity_residual(series)
        est["energy_identity_rel_residual"] = ident.max_abs / ident.scale
    files = write_outputs(series, {"verdict": verdict, "estimates": est}, cfg.output_dir)
    print(f"verdict: {verdict.tag} ({verdict.status}); peak norm {verdict.peak_norm:.6g}")
    if verdict.blew_up:
        print(f"t_est = {verdict.t_est:.6g}, t_last_stable = {verdict.t_last_stable:.6g}, "
              f"kappa = {verdict.kappa:.4g}")
    for k, v in est.items():
        print(f"{k}: {v:.6g}")
    print("wrote " + ", ".join(str(f) for f in files))
    return EXIT_OK


def _cmd_picard(args) -> int:
    cfg = _load(args).validate()
    grid = cfg.grid()
    u0, u1 = cfg.data(grid)
    kind = cfg.nonlinearity()
    if kind is None:
        raise ConfigError("picard needs a nonlinearity (kind = none given)")
    solver = cfg.solver()
    if args.T is None:
        rep = find_contraction_horizon(grid, u0, u1, kind, solver, args.t_max, tol=args.tol)
        print(f"contraction horizon T = {rep.T:.6g} (found: {str(rep.found).lower()})")
        for t, ok, ratio, status in rep.probes:
            print(f"  probe T = {t:.6g}: {status}, max ratio {ratio:.4g}, contracts: {str(ok).lower()}")
        trace = rep.trace
    else:
        _, trace = picard_iterate(grid, u0, u1, kind, PicardConfig(T=args.T, tol=args.tol), solver)
        print(f"status: {trace.status} after {trace.iterations} iterations; "
              f"max ratio {trace.max_ratio:.4g}; R = {trace.R:.6g}")
    files = write_outputs(None, {"trace": trace}, cfg.output_dir)
    print("wrote " + ", ".join(str(f) for f in files))
    return EXIT_OK if trace is not None and trace.converged else EXIT_NUMERIC


def _cmd_verify(args) -> int:
    names = {"all": DEFAULT_SUITES, "full": tuple(SUITES)}.get(args.suite, (args.suite,))
    ok = True
    for name in names:
        res = SUITES[name]()
        print(f"[{name}]")
        for line in res.lines:
            print("  " + line)
        ok &= res.passed
    return EXIT_OK if ok else EXIT_VERIFY


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    if args.workers is not None:
        cfg = replace(cfg, workers=args.workers)
    plan = SweepPlan.from_config(cfg)
    result = run_sweep(plan)
    files = phase_diagram_export(result, cfg.output_dir, OutputWriter(cfg.output_dir))
    rate = result.agreement_rate()
    print(f"{len(result.runs)} runs; theory blow-up points with observed blow-up: "
          + ("n/a" if rate != rate else f"{100 * rate:.1f}%"))
    print("wrote " + ", ".join(str(f) for f in files))
    return EXIT_OK


def _cmd_theory(args) -> int:
    if args.constants:
        c = constants()
        print(f"alpha1 = {c.alpha1:.17g} (residual {c.residual1:.3g})")
        print(f"alpha2 = {c.alpha2:.17g} (residual {c.residual2:.3g})")
        return EXIT_OK
    if args.n is None or args.q is None:
        raise UsageError("theory needs --n and --q (or --constants)")
    if args.kind == "derivative":
        m = in_blowup_region_derivative(args.n, args.q)
    else:
        if args.p is None:
            raise UsageError("mixed kind needs --p")
        m = in_blowup_region_mixed(args.n, args.p, args.q)
    print(f"membership: {str(m.inside).lower()}")
    print(f"boundary: {str(m.boundary).lower()}")
    if m.condition is not None:
        print(f"condition: {m.condition}")
    if m.witness_alpha is not None:
        print(f"witness alpha: {m.witness_alpha:.17g}")
    return EXIT_OK


COMMANDS = {
    "run": _cmd_run,
    "picard": _cmd_picard,
    "verify": _cmd_verify,
    "sweep": _cmd_sweep,
    "theory": _cmd_theory,
}


def cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as exc:
        print(f"sdwave: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericError as exc:
        print(f"sdwave: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"sdwave: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


def main() -> None:
    sys.exit(cli())
