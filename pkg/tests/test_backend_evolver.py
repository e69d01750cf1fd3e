import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdwave import BACKEND, ConfigError, DomainSpec, NonlinKind, UsageError, build_grid
from sdwave._backend import get_kernels
from sdwave.evolver import Evolver, SolverConfig, State
from sdwave.operators import implicit_matrix, make_stencil
from sdwave.profiles import make_profile

try:
    get_kernels("cython")
    HAVE_CORE = True
except ImportError:
    HAVE_CORE = False

needs_core = pytest.mark.skipif(not HAVE_CORE, reason="compiled extension not built")


def grid(n=1, j=100, r_out=20.0):
    return build_grid(DomainSpec(n, 0.0 if n == 1 else 1.0, r_out), j)


def test_backend_name_is_known():
    assert BACKEND in ("cython", "python")


def test_unknown_backend_rejected():
    with pytest.raises(ValueError):
        get_kernels("fortran")


@needs_core
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(16, 200), st.floats(0.5, 1.0), st.integers(0, 2**31 - 1))
def test_theta_step_parity(n, j, theta, seed):
    g = grid(n, j)
    s = make_stencil(g)
    dt = 0.7 * g.dx
    m = implicit_matrix(s, dt, theta)
    rng = np.random.default_rng(seed)
    u, v, f = (g.sample(lambda r: rng.standard_normal(r.size)) for _ in range(3))
    outs = []
    for name in ("cython", "python"):
        k = get_kernels(name)
        fac = k.ThomasFactor(m.sub, m.diag, m.sup)
        uo, vo, w = np.empty(g.size), np.empty(g.size), np.empty(g.size)
        k.theta_step(u, v, f, s.lower, s.diag, s.upper, fac, dt, theta, uo, vo, w)
        outs.append((uo, vo))
    assert np.allclose(outs[0][0], outs[1][0], rtol=1e-12, atol=1e-12)
    assert np.allclose(outs[0][1], outs[1][1], rtol=1e-12, atol=1e-12)


@needs_core
@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(16, 200), st.integers(0, 2**31 - 1))
def test_norm_and_laplacian_parity(n, j, seed):
    g = grid(n, j)
    s = make_stencil(g)
    rng = np.random.default_rng(seed)
    u, v = rng.standard_normal(g.size), rng.standard_normal(g.size)
    a, b = get_kernels("cython"), get_kernels("python")
    na = a.h1_pair_norm(u, v, g.quad_weights, g.dx)
    nb = b.h1_pair_norm(u, v, g.quad_weights, g.dx)
    assert math.isclose(na, nb, rel_tol=1e-12)
    la, lb = np.empty(g.size), np.empty(g.size)
    a.laplacian(s.lower, s.diag, s.upper, u, la)
    b.laplacian(s.lower, s.diag, s.upper, u, lb)
    assert np.allclose(la, lb, rtol=1e-13, atol=1e-12)


@needs_core
def test_full_march_parity():
    g = grid(3, 200)
    u1 = make_profile(g, amplitude=0.3)
    finals = []
    for name in ("cython", "python"):
        ev = Evolver(g, SolverConfig(0.05), backend=get_kernels(name))
        fin, _ = ev.solve_semilinear(0 * u1, u1, NonlinKind.mixed(2, 1.5), 5.0, store=False)
        finals.append(fin.u)
    assert np.allclose(finals[0], finals[1], rtol=1e-11, atol=1e-14)


@pytest.mark.parametrize("name", ["python"] + (["cython"] if HAVE_CORE else []))
def test_singular_factor_raises(name):
    k = get_kernels(name)
    with pytest.raises(ZeroDivisionError):
        k.ThomasFactor(np.zeros(5), np.array([1.0, 0.0, 1.0, 1.0, 1.0]), np.zeros(5))


def test_dt_larger_than_dx_rejected():
    g = grid(1, 20)
    with pytest.raises(ConfigError):
        Evolver(g, SolverConfig(dt=2 * g.dx))


@pytest.mark.parametrize("kw", [dict(dt=0.0), dict(dt=0.1, theta=0.3), dict(dt=0.1, store_every=0)])
def test_solver_config_validation(kw):
    with pytest.raises(ConfigError):
        SolverConfig(**kw)


def test_time_not_multiple_of_dt():
    with pytest.raises(UsageError):
        SolverConfig(dt=0.3).steps_to(1.0)


def test_zero_data_stays_zero():
    g = grid(2, 64)
    ev = Evolver(g, SolverConfig(0.1))
    fin, traj = ev.solve_linear(g.zeros(), g.zeros(), 2.0)
    assert not np.any(fin.u) and not np.any(fin.v)
    assert len(traj) == 21


def test_dirichlet_values_preserved():
    g = grid(3, 80)
    ev = Evolver(g, SolverConfig(0.1))
    fin, _ = ev.solve_semilinear(g.zeros(), make_profile(g), NonlinKind.derivative(1.3), 3.0)
    assert fin.u[0] == fin.u[-1] == fin.v[0] == fin.v[-1] == 0.0


def test_store_every_thins_and_keeps_final():
    g = grid(1, 64)
    ev = Evolver(g, SolverConfig(0.1, store_every=3))
    _, traj = ev.solve_linear(g.zeros(), make_profile(g), 1.0)
    assert traj.times[0] == 0.0
    assert math.isclose(traj.times[-1], 1.0)
    assert len(traj) == 5  # 0, 0.3, 0.6, 0.9, 1.0


def test_overflow_flagged_not_raised():
    g = grid(1, 64)
    ev = Evolver(g, SolverConfig(0.1))
    big = make_profile(g, amplitude=1e150)
    fin, _ = ev.solve_semilinear(g.zeros(), big, NonlinKind.derivative(3.0), 5.0, store=False)
    assert fin.overflowed


@pytest.mark.parametrize("theta", [0.5, 0.75, 1.0])
def test_homogeneous_energy_monotone(theta):
    g = grid(3, 120)
    ev = Evolver(g, SolverConfig(0.1, theta=theta))
    st_ = State(0.0, make_profile(g, "gaussian"), make_profile(g, "cinf", -1.0))
    e = [ev.energy(st_.u, st_.v)]
    for _ in range(50):
        st_ = ev.step_linear(st_)
        e.append(ev.energy(st_.u, st_.v))
    assert np.all(np.diff(e) <= 1e-13 * e[0])
    assert e[-1] < e[0]
