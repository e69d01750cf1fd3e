"""Per-step norm records and the energy estimates as runtime checks.

Gradient norms that enter the energy (``grad_u``, ``dissipation``) use face
differences, i.e. the quadratic form of the discrete Laplacian; the
``h1semi_*`` columns use centered differences.  The estimates with unknown
constants are reported as sup-ratios, to be compared across refinements.
"""

from __future__ import annotations

import math
from dataclasses import astuple, dataclass, fields

import numpy as np

from .grid import RadialGrid, face_gradient_sq, h1_seminorm, inner, l2_norm

RATIO_FLOOR = 1e-300


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    l2_u: float
    l2_v: float
    h1semi_u: float
    h1semi_v: float
    h1_u: float
    h1_v: float
    l2_f: float
    cum_l2_f: float
    cum_dissipation: float
    energy: float
    grad_u: float
    dissipation: float
    power: float
    cum_l2_f_sq: float
    cum_f_v: float


RECORD_FIELDS = tuple(f.name for f in fields(EnergyRecord))


@dataclass
class EnergyTimeSeries:
    records: list
    dt: float
    store_every: int = 1

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def rows(self):
        return [astuple(r) for r in self.records]


class Recorder:
    """Accumulates records while an evolution runs.

    Pass ``recorder.observe`` as the ``observe`` hook of ``Evolver.march``;
    it must see every time level for the running integrals to be right.
    """

    def __init__(self, grid: RadialGrid, dt: float, store_every: int = 1):
        self.grid = grid
        self.dt = dt
        self.store_every = store_every
        self.records: list[EnergyRecord] = []
        self._k = 0
        self._prev = None
        self._cum = [0.0, 0.0, 0.0, 0.0]
        self._last = None

    def observe(self, t, u, v, f):
        rec = record(self.grid, t, u, v, f, self._cum, self._prev)
        self._prev = rec
        self._cum = [rec.cum_l2_f, rec.cum_dissipation, rec.cum_l2_f_sq, rec.cum_f_v]
        if self._k % self.store_every == 0:
            self.records.append(rec)
        self._last = rec
        self._k += 1

    def series(self) -> EnergyTimeSeries:
        recs = list(self.records)
        if self._last is not None and (not recs or recs[-1] is not self._last):
            recs.append(self._last)
        return EnergyTimeSeries(recs, self.dt, self.store_every)


def record(grid: RadialGrid, t, u, v, f, cum=(0.0, 0.0, 0.0, 0.0), prev=None) -> EnergyRecord:
    """Norms of one time level; running integrals advance by the trapezoid rule."""
    l2u, l2v = l2_norm(grid, u), l2_norm(grid, v)
    hu, hv = h1_seminorm(grid, u), h1_seminorm(grid, v)
    l2f = l2_norm(grid, f)
    gu2 = face_gradient_sq(grid, u)
    diss = face_gradient_sq(grid, v)
    power = inner(grid, f, v)
    energy = 0.5 * (l2v * l2v + gu2)
    c_f, c_d, c_f2, c_fv = cum
    if prev is not None:
        h = 0.5 * (t - prev.t)
        c_f += h * (prev.l2_f + l2f)
        c_d += h * (prev.dissipation + diss)
        c_f2 += h * (prev.l2_f**2 + l2f**2)
        c_fv += h * (prev.l2_f * prev.l2_v + l2f * l2v)
    return EnergyRecord(
        float(t), l2u, l2v, hu, hv, l2u + hu, l2v + hv, l2f, c_f, c_d,
        energy, math.sqrt(gu2), diss, power, c_f2, c_fv,
    )


@dataclass
class EstimateReport:
    name: str
    sup_ratio: float
    t_at_sup: float
    ratios: np.ndarray

    def summary(self) -> str:
        return f"{self.name}: sup ratio {self.sup_ratio:.6g} at t = {self.t_at_sup:.4g}"


def _report(name, series, num, den) -> EstimateReport:
    if len(series) == 0:
        raise ValueError("empty series")
    ratios = np.asarray(num) / np.maximum(np.asarray(den), RATIO_FLOOR)
    i = int(np.argmax(ratios))
    return EstimateReport(name, float(ratios[i]), float(series.records[i].t), ratios)


def _cumtrapz(t, y):
    out = np.zeros_like(y)
    if len(y) > 1:
        out[1:] = np.cumsum(0.5 * np.diff(t) * (y[1:] + y[:-1]))
    return out


def check_energy_bound(series: EnergyTimeSeries) -> EstimateReport:
    """``||(v, d_r u)(t)|| / (||(u1, d_r u0)|| + int_0^t ||F||)``."""
    e = series.column("energy")
    num = np.sqrt(2.0 * e)
    den = math.sqrt(2.0 * e[0]) + series.column("cum_l2_f")
    return _report("energy-forced", series, num, den)


def check_displacement_bound(series: EnergyTimeSeries) -> EstimateReport:
    """``||u(t)|| / (||u0|| + int_0^t (||(u1, d_r u0)|| + int_0^s ||F||) ds)``."""
    t = series.column("t")
    e0 = math.sqrt(2.0 * series.records[0].energy)
    inner_int = _cumtrapz(t, e0 + series.column("cum_l2_f"))
    den = series.records[0].l2_u + inner_int
    return _report("l2-displacement", series, series.column("l2_u"), den)


def check_velocity_gradient_bound(series: EnergyTimeSeries) -> EstimateReport:
    """``||d_r v(t)||^2`` against the four-term right side (constants dropped)."""
    r0 = series.records[0]
    data = r0.grad_u**2 + r0.h1_v**2
    den = (data + series.column("cum_l2_f_sq") + series.column("grad_u") ** 2
           + series.column("cum_f_v"))
    return _report("velocity-gradient", series, series.column("dissipation"), den)


@dataclass
class IdentityResidual:
    residuals: np.ndarray
    max_abs: float
    scale: float


def energy_identity_residual(series: EnergyTimeSeries) -> IdentityResidual:
    """Per-step ``E_{k+1} - E_k + dt*<D> - dt*<P>`` with trapezoid averages.

    ``D = ||d_r v||^2`` and ``P = <F, v>``; needs ``store_every = 1``.
    """
    if series.store_every != 1:
        raise ValueError("energy identity needs every step (store_every = 1)")
    t = series.column("t")
    e = series.column("energy")
    d = series.column("dissipation")
    p = series.column("power")
    h = np.diff(t)
    res = np.diff(e) + 0.5 * h * (d[1:] + d[:-1]) - 0.5 * h * (p[1:] + p[:-1])
    scale = float(max(e.max(initial=0.0), RATIO_FLOOR))
    return IdentityResidual(res, float(np.max(np.abs(res), initial=0.0)), scale)


def energy_violations(series: EnergyTimeSeries, rtol: float = 1e-13) -> int:
    """Number of steps where the energy increased beyond round-off."""
    e = series.column("energy")
    if len(e) < 2:
        return 0
    slack = rtol * max(float(e[0]), RATIO_FLOOR)
    return int(np.sum(np.diff(e) > slack))


def check_dissipation_bound(series: EnergyTimeSeries) -> float:
    """Max over t of ``int ||d_r v||^2 - (E0 + int ||F|| ||v||)``; <= ~0 expected."""
    e0 = series.records[0].energy
    gap = series.column("cum_dissipation") - (e0 + series.column("cum_f_v"))
    return float(np.max(gap))
