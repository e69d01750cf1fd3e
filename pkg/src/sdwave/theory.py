"""Exponent regions with proved blow-up, and their constants.

Derivative type ``|u_t|^q``:

* ``n >= 3``: ``1 < q <= 1 + 1/n``;
* ``n = 2``:  ``1 < q < 3/2``;
* ``n = 1``:  ``1 < q <= 1 + 1/(1 + sqrt 5)``.

Mixed type ``|u|^p + |u_t|^q``: for ``n >= 3`` either ``p <= 1 + 2/(n-1)`` or
``q <= 1 + 1/n``; for ``n = 2`` either ``p < 3`` or ``q < 3/2``; on the
half-line one of four conditions, two of which are families indexed by an
anisotropy exponent ``alpha``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class TheoryConstants:
    alpha1: float
    alpha2: float

    @property
    def residual1(self) -> float:
        a = self.alpha1
        return abs(2.0 * a * a - a - 2.0)

    @property
    def residual2(self) -> float:
        a = self.alpha2
        return abs(a * a - a - 1.0)


def constants() -> TheoryConstants:
    return TheoryConstants((1.0 + math.sqrt(17.0)) / 4.0, (1.0 + math.sqrt(5.0)) / 2.0)


ALPHA1 = constants().alpha1
ALPHA2 = constants().alpha2


def q_crit(n: int) -> float:
    """Critical derivative exponent; the bound is strict for ``n = 2``."""
    if n >= 3:
        return 1.0 + 1.0 / n
    if n == 2:
        return 1.5
    return 1.0 + 1.0 / (1.0 + math.sqrt(5.0))


def p_crit(n: int) -> float:
    """Critical power exponent of the mixed problem, ``n >= 2``; strict for ``n = 2``."""
    if n >= 3:
        return 1.0 + 2.0 / (n - 1)
    if n == 2:
        return 3.0
    raise ConfigError("the half-line has no single critical p")


@dataclass(frozen=True)
class Membership:
    inside: bool
    boundary: bool
    condition: int | None = None
    witness_alpha: float | None = None


def _check(n, **exps):
    if int(n) != n or n < 1:
        raise ConfigError(f"dimension must be an integer >= 1, got {n}")
    for name, e in exps.items():
        if not e > 1.0:
            raise ConfigError(f"{name} must exceed 1, got {e}")


def _near(x, b) -> bool:
    return abs(x - b) <= BOUNDARY_TOL


def _le(x, b, strict: bool) -> bool:
    return x < b if strict else x <= b


def in_blowup_region_derivative(n: int, q: float) -> Membership:
    _check(n, q=q)
    b = q_crit(n)
    return Membership(_le(q, b, n == 2), _near(q, b))


def _mixed_half_line(p: float, q: float) -> Membership:
    a1, a2 = ALPHA1, ALPHA2
    near = False
    # 1: p <= 1 + alpha1
    near |= _near(p, 1.0 + a1)
    if p <= 1.0 + a1:
        return Membership(True, near, 1)
    # 2: some alpha in (1, alpha1] with q <= (alpha+1)/2 and p <= (2 alpha+1)/(2 alpha-1);
    #    the smallest admissible alpha is the best witness
    lo2 = max(2.0 * q - 1.0, 1.0)
    if lo2 <= a1:
        pb = (2.0 * lo2 + 1.0) / (2.0 * lo2 - 1.0)
        near |= _near(p, pb) or _near(lo2, a1)
        if p <= pb:
            return Membership(True, near, 2, lo2)
    # 3: some alpha in [alpha1, alpha2] with p <= 1 + alpha and 2 alpha (q-1) <= 1
    lo3 = max(a1, p - 1.0)
    hi3 = min(a2, 1.0 / (2.0 * (q - 1.0)))
    near |= _near(lo3, hi3)
    if lo3 <= hi3:
        return Membership(True, near, 3, lo3)
    # 4: q <= (1 + alpha2)/2
    b4 = 0.5 * (1.0 + a2)
    near |= _near(q, b4)
    if q <= b4:
        return Membership(True, near, 4)
    return Membership(False, near)


def in_blowup_region_mixed(n: int, p: float, q: float) -> Membership:
    _check(n, p=p, q=q)
    if n == 1:
        return _mixed_half_line(p, q)
    strict = n == 2
    pb, qb = p_crit(n), q_crit(n)
    near = _near(p, pb) or _near(q, qb)
    if _le(p, pb, strict):
        return Membership(True, near, 1)
    if _le(q, qb, strict):
        return Membership(True, near, 2)
    return Membership(False, near)


def _alpha_grid(n_alpha: int) -> np.ndarray:
    a = np.linspace(1.0, ALPHA2, n_alpha)[1:]
    return np.union1d(a, [ALPHA1])


def brute_force_grid(p_grid, q_grid, n_alpha: int = 1_000_000) -> np.ndarray:
    """Half-line membership on ``p_grid x q_grid`` by scanning alpha over ``(1, alpha2]``.

    For each ``q`` the largest ``p`` admitted by any grid alpha is found
    directly, independent of the analytic reduction.
    """
    a = _alpha_grid(n_alpha)
    p = np.asarray(p_grid, dtype=float)
    out = np.empty((len(p), len(q_grid)), dtype=bool)
    c2_p = (2.0 * a + 1.0) / (2.0 * a - 1.0)
    c2_q = (a + 1.0) / 2.0
    in3 = a >= ALPHA1
    c3_p = 1.0 + a
    for j, q in enumerate(q_grid):
        ok2 = (a <= ALPHA1) & (q <= c2_q)
        ok3 = in3 & (2.0 * a * (q - 1.0) <= 1.0)
        p_max = max(c2_p[ok2].max(initial=-np.inf), c3_p[ok3].max(initial=-np.inf), 1.0 + ALPHA1)
        if q <= 0.5 * (1.0 + ALPHA2):
            p_max = np.inf
        out[:, j] = p <= p_max
    return out


def brute_force_mixed_half_line(p: float, q: float, n_alpha: int = 1_000_000) -> bool:
    return bool(brute_force_grid([p], [q], n_alpha)[0, 0])


def overlay_polylines(n: int, kind: str, p_range=(1.0, 4.0), q_range=(1.0, 2.0), samples: int = 401):
    """Region boundaries as named lists of ``(p, q)`` points for plotting.

    Derivative type gives a single horizontal line in ``q``; the mixed type
    gives the boundary of the half-line region traced column by column.
    """
    if kind == "derivative":
        qc = q_crit(n)
        return {"q_crit": [(p_range[0], qc), (p_range[1], qc)]}
    if n >= 2:
        pc, qc = p_crit(n), q_crit(n)
        return {"p_crit": [(pc, q_range[0]), (pc, q_range[1])],
                "q_crit": [(p_range[0], qc), (p_range[1], qc)]}
    ps = np.linspace(p_range[0], p_range[1], samples)[1:]
    line = []
    for p in ps:
        lo, hi = q_range[0], q_range[1]
        if in_blowup_region_mixed(1, float(p), hi).inside:
            line.append((float(p), hi))
            continue
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if mid > 1.0 and in_blowup_region_mixed(1, float(p), mid).inside:
                lo = mid
            else:
                hi = mid
        line.append((float(p), lo))
    return {"boundary": line}
