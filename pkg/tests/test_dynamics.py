import math

import numpy as np
import pytest

from sdwave import ConfigError, DomainSpec, NonlinKind, UsageError, build_grid
from sdwave.blowup import Thresholds, Verdict, amplitude_threshold_scan, detect, fit_blowup_time
from sdwave.diagnostics import (
    RECORD_FIELDS,
    Recorder,
    check_dissipation_bound,
    check_energy_bound,
    energy_identity_residual,
    energy_violations,
)
from sdwave.evolver import Evolver, SolverConfig
from sdwave.picard import PicardConfig, direct_distance, picard_iterate, xt_norm
from sdwave.profiles import make_profile


def grid(n=1, j=100, r_out=20.0):
    return build_grid(DomainSpec(n, 0.0 if n == 1 else 1.0, r_out), j)


def recorded_run(g, dt, t, forcing=None, store_every=1):
    ev = Evolver(g, SolverConfig(dt, store_every=store_every))
    rec = Recorder(g, dt, store_every)
    ev.solve_linear(make_profile(g, "cinf", 0.5), make_profile(g), t, forcing, store=False,
                    observe=rec.observe)
    return rec.series()


def test_recorder_fields_and_length():
    s = recorded_run(grid(), 0.1, 2.0)
    assert len(s) == 21
    assert RECORD_FIELDS[:3] == ("t", "l2_u", "l2_v")
    assert np.allclose(s.column("h1_u"), s.column("l2_u") + s.column("h1semi_u"))


def test_recorder_store_every_keeps_last():
    s = recorded_run(grid(), 0.1, 1.0, store_every=4)
    assert [round(r.t, 10) for r in s.records] == [0.0, 0.4, 0.8, 1.0]


def test_homogeneous_energy_and_dissipation():
    s = recorded_run(grid(3), 0.1, 5.0)
    assert energy_violations(s) == 0
    assert check_dissipation_bound(s) <= 1e-10
    assert np.all(s.column("l2_f") == 0)


def test_energy_identity_needs_every_step():
    s = recorded_run(grid(), 0.1, 1.0, store_every=2)
    with pytest.raises(ValueError):
        energy_identity_residual(s)


def test_energy_identity_small_and_shrinks():
    errs = []
    for j, dt in ((100, 0.1), (200, 0.05)):
        g = grid(1, j)
        bump = make_profile(g, "cinf", center=8.0)
        errs.append(energy_identity_residual(recorded_run(g, dt, 2.0, lambda t: math.sin(t) * bump)).max_abs)
    assert errs[1] < errs[0] / 1.8


def test_estimate_ratio_at_most_one_for_linear_decay():
    rep = check_energy_bound(recorded_run(grid(3), 0.1, 5.0))
    assert math.isfinite(rep.sup_ratio) and rep.sup_ratio <= 1.0 + 1e-12


def test_fit_recovers_synthetic_blowup():
    t_star, kappa = 3.0, 2.0
    t = np.linspace(0.0, 2.999, 4000)
    y = (t_star - t) ** (-kappa)
    t_est, k_est = fit_blowup_time(t, y, 1e6)
    assert abs(t_est - t_star) < 1e-3
    assert abs(k_est - kappa) / kappa < 0.02


def test_thresholds_validation():
    with pytest.raises(ConfigError):
        Thresholds(factor=1.0)
    with pytest.raises(ConfigError):
        Thresholds(max_steps=0)


def test_linear_run_is_global():
    g = grid(1, 200)
    v = detect(g, g.zeros(), make_profile(g), None, SolverConfig(0.1, t_end=5.0))
    assert v.tag == "GlobalUpTo" and not v.blew_up
    assert v.status == "no blow-up observed within budget"
    assert v.t_last_stable == 5.0


def test_budget_caps_steps():
    g = grid(1, 200)
    v = detect(g, g.zeros(), make_profile(g), None, SolverConfig(0.1, t_end=5.0), Thresholds(max_steps=7))
    assert v.t_end == pytest.approx(0.7)


def test_blowup_detected_and_confirmed():
    g = grid(1, 400, 40.0)
    v = detect(g, g.zeros(), make_profile(g, amplitude=5.0), NonlinKind.derivative(1.2),
               SolverConfig(0.0125, t_end=20.0))
    assert v.blew_up and v.refinement_confirmed and v.status == "confirmed"
    assert v.t_last_stable <= v.t_est < 20.0
    assert v.sign_functional > 0
    assert set(v.to_dict()) == {"tag", "t_est", "t_last_stable", "kappa", "peak_norm",
                                "refinement_confirmed", "sign_functional"}


def test_amplitude_scan_earlier_blowup_for_larger_data():
    g = grid(1, 400, 40.0)
    res = amplitude_threshold_scan(g, g.zeros(), make_profile(g), NonlinKind.derivative(1.2),
                                   SolverConfig(0.0125, t_end=20.0), [2.0, 8.0])
    (a1, v1), (a2, v2) = res
    assert (a1, a2) == (2.0, 8.0)
    assert v1.blew_up and v2.blew_up and v2.t_est < v1.t_est


def test_verdict_status_suspected():
    assert Verdict("BlowupAt", 1.0, 1e9, t_est=0.9).status == "suspected"


def picard_setup():
    g = grid(1, 200)
    u1 = make_profile(g)
    return g, np.zeros_like(u1), u1, NonlinKind.mixed(2, 2), SolverConfig(0.02)


def test_picard_converges_on_short_horizon():
    g, u0, u1, kind, cfg = picard_setup()
    traj, tr = picard_iterate(g, u0, u1, kind, PicardConfig(T=0.4), cfg)
    assert tr.converged
    assert tr.max_ratio < 0.5
    assert direct_distance(g, traj, u0, u1, kind, cfg) <= 5e-10 * xt_norm(traj, g)
    rows = tr.rows()
    assert rows[0][0] == 1 and math.isnan(rows[0][3])


def test_picard_leaves_ball_on_long_horizon():
    g, u0, u1, kind, cfg = picard_setup()
    _, tr = picard_iterate(g, u0, 5 * u1, kind, PicardConfig(T=4.0), cfg)
    assert not tr.converged
    assert tr.status in ("left-ball", "diverged", "overflow")


def test_picard_config_validation():
    with pytest.raises(ConfigError):
        PicardConfig(T=0.0)
    with pytest.raises(ConfigError):
        PicardConfig(T=1.0, tol=0.5)


def test_xt_norm_needs_grid():
    g, u0, u1, kind, cfg = picard_setup()
    traj, _ = picard_iterate(g, u0, u1, kind, PicardConfig(T=0.1), cfg)
    with pytest.raises(UsageError):
        xt_norm(traj)
