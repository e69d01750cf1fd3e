import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdwave import ConfigError, DomainSpec, UsageError, build_grid
from sdwave import testfn as tf
from sdwave.errors import DomainTooSmallError
from sdwave.evolver import Evolver, SolverConfig
from sdwave.harmonic import make_weight
from sdwave.profiles import make_profile


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 1.0))
def test_cutoff_ranges(s):
    assert 0.0 <= float(tf.eta(s)) <= 1.0
    assert 0.0 <= float(tf.big_phi(2.0 * s)) <= 1.0


def test_cutoff_plateaus():
    assert tf.eta(0.3) == 1.0 and tf.eta(1.0) == 0.0
    assert tf.big_phi(0.9) == 1.0 and tf.big_phi(2.0) == 0.0


def test_cutoff_derivative_bounds():
    s = np.linspace(0.0, 1.0, 20001)
    assert np.max(np.abs(tf.eta_d1(s))) == pytest.approx(tf.ETA_D1_BOUND, rel=1e-6)
    rho = np.linspace(1.0, 2.0, 20001)
    assert np.max(np.abs(tf.big_phi_d2(rho))) == pytest.approx(tf.PHI_D2_BOUND, rel=1e-6)


def test_cutoff_derivatives_match_differences():
    s = np.linspace(0.55, 0.95, 30)
    h = 1e-6
    assert np.allclose(tf.eta_d1(s), (tf.eta(s + h) - tf.eta(s - h)) / (2 * h), atol=1e-6)
    rho = np.linspace(1.05, 1.95, 30)
    assert np.allclose(tf.big_phi_d2(rho), (tf.big_phi_d1(rho + h) - tf.big_phi_d1(rho - h)) / (2 * h),
                       atol=1e-5)


def test_default_power_and_conjugate():
    assert tf.conjugate(2.0) == 2.0
    assert tf.default_power([2.0]) == 8
    assert tf.default_power([1.5, 3.0]) == 12


def test_make_cutoffs_validation():
    with pytest.raises(ConfigError):
        tf.make_cutoffs(0.0)
    with pytest.raises(ConfigError):
        tf.make_cutoffs(4.0, n=1, alpha=0.5)
    with pytest.raises(ConfigError):
        tf.make_cutoffs(4.0, k=2, ell=2, exponents=[2.0])


def test_psi_is_tail_integral():
    c = tf.make_cutoffs(4.0, 4, 4, n=3)
    t = np.linspace(0.0, 4.0, 40001)
    tail = np.trapezoid(c.eta_k(t), t)
    assert c.psi(0.0) == pytest.approx(tail, rel=1e-6)
    assert c.psi(4.0) == 0.0
    assert np.all(np.diff(c.psi(t)) <= 1e-15)


def test_spatial_laplacian_matches_numeric():
    g = build_grid(DomainSpec(3, 1.0, 12.0), 2000)
    w = make_weight(g)
    c = tf.make_cutoffs(3.0, 4, 4, n=3)
    r = g.nodes
    val, lap = tf.spatial_part(c, w, r)
    h = g.dx
    d1 = np.gradient(val, h)
    num = np.gradient(d1, h) + 2.0 * d1 / r
    # the cutoff is only C^2 at r = S, so the difference check is first order there
    assert np.max(np.abs(num - lap)[5:-5]) < 1e-2 * np.max(np.abs(lap))


def test_composite_shape():
    g = build_grid(DomainSpec(1, 0.0, 10.0), 50)
    c = tf.make_cutoffs(2.0, 4, 4, 1.0, 1)
    vals = tf.composite_test_function(c, make_weight(g), np.linspace(0, 2, 7), g.nodes)
    assert vals.phi.shape == (7, g.size)
    assert np.all(vals.phi[-1] == 0.0)


def test_sign_functional_positive_for_positive_bump():
    g = build_grid(DomainSpec(3, 1.0, 12.0), 100)
    w = make_weight(g)
    assert tf.sign_functional(make_profile(g), w) > 0
    assert tf.sign_functional(-make_profile(g), w) < 0


def test_weak_residual_small_for_smooth_linear_run():
    g = build_grid(DomainSpec(1, 0.0, 8.0), 128)
    ev = Evolver(g, SolverConfig(1 / 32))
    _, traj = ev.solve_linear(make_profile(g, "cinf", 0.3), make_profile(g), 2.0)
    rep = tf.weak_form_residual(traj, None, tf.make_cutoffs(2.0, 4, 4, 1.0, 1), make_weight(g))
    assert abs(rep.weak_residual) < 1e-2 * max(abs(rep.lhs), abs(rep.rhs), 1.0)


@pytest.mark.parametrize("n,q,alpha", [(3, 2.0, 1.0), (2, 1.25, 1.0), (1, 1.2, 1.5)])
def test_i1_slope(n, q, alpha):
    rep = tf.scaling_slope("I1", n, q, [8, 16, 32, 64], alpha=alpha)
    assert abs(rep.slope - rep.expected) <= 0.15
    assert rep.log_corrected == (n == 2)
    assert len(rep.rows()) == 4


@pytest.mark.parametrize("term", ["I2_grad", "I2_lap"])
@pytest.mark.parametrize("n", [1, 3])
def test_i2_slopes(term, n):
    rep = tf.scaling_slope(term, n, 2.0, [8, 16, 32, 64])
    assert abs(rep.slope - rep.expected) <= 0.15


def test_slope_argument_checks():
    with pytest.raises(UsageError):
        tf.scaling_slope("I1", 3, 2.0, [8, 16, 32])
    with pytest.raises(DomainTooSmallError):
        tf.scaling_slope("I1", 3, 2.0, [8, 16, 32, 64], r_out=50.0)
    with pytest.raises(ConfigError):
        tf.expected_slope("I9", 3, 2.0)


def test_critical_prefactor_vanishes_at_critical_q():
    for n in (3, 4, 5):
        assert abs(tf.critical_prefactor_exponent(n, 1 + 1 / n)) < 1e-12
    assert tf.critical_prefactor_exponent(3, 1.2) < 0
    assert math.isclose(tf.expected_slope("I1", 3, 2.0), 2.0)
