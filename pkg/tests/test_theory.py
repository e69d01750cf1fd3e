import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdwave import ConfigError
from sdwave.theory import (
    ALPHA1,
    ALPHA2,
    BOUNDARY_TOL,
    brute_force_grid,
    brute_force_mixed_half_line,
    constants,
    in_blowup_region_derivative,
    in_blowup_region_mixed,
    overlay_polylines,
    p_crit,
    q_crit,
)


def test_constants_are_roots():
    c = constants()
    assert c.residual1 <= 1e-12 and c.residual2 <= 1e-12
    assert 1.0 < ALPHA1 < ALPHA2
    assert round(1 + ALPHA1, 2) == 2.28
    assert round((1 + ALPHA2) / 2, 1) == 1.3


def test_critical_exponents():
    assert q_crit(3) == pytest.approx(4 / 3)
    assert q_crit(2) == 1.5
    assert q_crit(1) == pytest.approx(1 + 1 / (1 + math.sqrt(5)))
    assert p_crit(3) == 2.0 and p_crit(2) == 3.0
    with pytest.raises(ConfigError):
        p_crit(1)


def test_derivative_boundary_point_is_inside_for_n3():
    m = in_blowup_region_derivative(3, 1.3333333333)
    assert m.inside and m.boundary


def test_two_d_bound_is_strict():
    assert not in_blowup_region_derivative(2, 1.5).inside
    assert in_blowup_region_derivative(2, 1.5 - 1e-6).inside
    assert not in_blowup_region_mixed(2, 3.0, 2.0).inside


@pytest.mark.parametrize("n", [1, 2, 3, 4, 7])
def test_derivative_region_is_an_interval(n):
    qs = np.linspace(1.001, 2.5, 300)
    inside = [in_blowup_region_derivative(n, q).inside for q in qs]
    k = inside.index(False)
    assert all(inside[:k]) and not any(inside[k:])


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6), st.floats(1.0001, 6.0), st.floats(1.0001, 3.0), st.floats(0.0, 2.0),
       st.floats(0.0, 1.0))
def test_mixed_region_is_a_down_set(n, p, q, dp, dq):
    # shrinking either exponent never leaves the region
    if in_blowup_region_mixed(n, p + dp, q + dq).inside:
        assert in_blowup_region_mixed(n, p, q).inside


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 6), st.floats(1.0001, 3.0))
def test_mixed_contains_derivative_region(n, q):
    if in_blowup_region_derivative(n, q).inside:
        assert in_blowup_region_mixed(n, 50.0, q).inside


def test_half_line_conditions_and_witness():
    assert in_blowup_region_mixed(1, 2.0, 1.9).condition == 1
    m = in_blowup_region_mixed(1, 2.5, 1.1)
    assert m.inside and m.condition in (2, 3)
    assert m.witness_alpha is not None and 1.0 <= m.witness_alpha <= ALPHA2
    assert in_blowup_region_mixed(1, 100.0, 1.25).condition == 4
    assert not in_blowup_region_mixed(1, 3.0, 1.5).inside


@pytest.mark.parametrize("p,q", [(2.5, 1.1), (2.4, 1.2), (3.0, 1.3), (2.29, 1.6), (5.0, 1.35), (2.6, 1.15)])
def test_brute_force_agrees_at_points(p, q):
    assert brute_force_mixed_half_line(p, q, 200_000) == in_blowup_region_mixed(1, p, q).inside


def test_brute_force_disagrees_only_on_boundaries():
    # (2.5, 4/3) has the single witness alpha = 1.5, which a finite alpha grid misses
    ps = np.linspace(1.0, 4.0, 61)[1:]
    qs = np.linspace(1.0, 2.0, 61)[1:]
    brute = brute_force_grid(ps, qs, 200_000)
    ms = [[in_blowup_region_mixed(1, p, q) for q in qs] for p in ps]
    analytic = np.array([[m.inside for m in row] for row in ms])
    boundary = np.array([[m.boundary for m in row] for row in ms])
    assert not np.any((brute != analytic) & ~boundary)
    assert np.sum(brute != analytic) <= 1


def test_invalid_exponents():
    with pytest.raises(ConfigError):
        in_blowup_region_derivative(3, 1.0)
    with pytest.raises(ConfigError):
        in_blowup_region_mixed(0, 2.0, 2.0)


def test_boundary_flag_tolerance():
    qc = q_crit(4)
    assert in_blowup_region_derivative(4, qc + 0.5 * BOUNDARY_TOL).boundary
    assert not in_blowup_region_derivative(4, qc + 1e-3).boundary


def test_overlay_polylines():
    d = overlay_polylines(3, "derivative")
    assert d["q_crit"][0][1] == pytest.approx(4 / 3)
    m = overlay_polylines(1, "mixed", samples=41)["boundary"]
    qs = [q for _, q in m]
    assert len(m) == 40
    assert all(a >= b - 1e-9 for a, b in zip(qs, qs[1:]))
