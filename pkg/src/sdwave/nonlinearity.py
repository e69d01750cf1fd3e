"""Power nonlinearities ``|u_t|^q``, ``|u|^p + |u_t|^q`` and ``|u|^p``."""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import RadialGrid, h1_norm, l2_norm


class Kind(enum.Enum):
    DERIVATIVE = "derivative"
    MIXED = "mixed"
    POWER = "power"


class LocalTheoryWarning(UserWarning):
    """Exponents outside the range where local existence is known."""


@dataclass(frozen=True)
class NonlinKind:
    kind: Kind
    p: float | None = None
    q: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        need_p = self.kind in (Kind.MIXED, Kind.POWER)
        need_q = self.kind in (Kind.MIXED, Kind.DERIVATIVE)
        for name, needed in (("p", need_p), ("q", need_q)):
            val = getattr(self, name)
            if needed and (val is None or not val > 1.0):
                raise ConfigError(f"{self.kind.value} nonlinearity needs {name} > 1, got {val}")
            if not needed and val is not None:
                object.__setattr__(self, name, None)

    @classmethod
    def derivative(cls, q):
        return cls(Kind.DERIVATIVE, q=q)

    @classmethod
    def mixed(cls, p, q):
        return cls(Kind.MIXED, p=p, q=q)

    @classmethod
    def power(cls, p):
        return cls(Kind.POWER, p=p)

    def exponents(self):
        return [e for e in (self.p, self.q) if e is not None]

    def check_local_theory(self, n: int) -> bool:
        """Warn when ``p, q <= n/(n-2)`` fails for ``n >= 3``; return compliance."""
        if n < 3:
            return True
        bound = n / (n - 2)
        ok = all(e <= bound for e in self.exponents())
        if not ok:
            warnings.warn(
                f"exponents {self.exponents()} exceed n/(n-2) = {bound:.4g}; "
                "local existence is not covered for this choice",
                LocalTheoryWarning,
                stacklevel=2,
            )
        return ok


def eval_f(kind: NonlinKind, u, v):
    """Pointwise nonlinearity; returns ``(values, overflowed)``.

    Overflow is reported through the flag rather than raised so that the
    blow-up detector can tell growth apart from a failure.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        if kind.kind is Kind.DERIVATIVE:
            f = np.abs(v) ** kind.q
        elif kind.kind is Kind.POWER:
            f = np.abs(u) ** kind.p
        else:
            f = np.abs(u) ** kind.p + np.abs(v) ** kind.q
    f[0] = 0.0
    f[-1] = 0.0
    overflowed = not bool(np.all(np.isfinite(f)))
    return f, overflowed


@dataclass
class DifferenceBoundReport:
    r: float
    n_pairs: int
    max_ratio: float

    @property
    def holds(self) -> bool:
        return self.max_ratio <= 1.0


def power_difference_ratio(x, y, r):
    """``||x|^r - |y|^r| / (r |x-y| (|x|^(r-1) + |y|^(r-1)))`` with 0/0 := 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lhs = np.abs(np.abs(x) ** r - np.abs(y) ** r)
    rhs = r * np.abs(x - y) * (np.abs(x) ** (r - 1) + np.abs(y) ** (r - 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(rhs > 0, lhs / np.where(rhs > 0, rhs, 1.0), 0.0)
    return ratio


def power_difference_bound_check(r: float, n_pairs: int = 100_000, seed: int = 0,
                                 lo: float = -10.0, hi: float = 10.0) -> DifferenceBoundReport:
    if not r > 1.0:
        raise ConfigError("exponent must exceed 1")
    rng = np.random.default_rng(seed)
    x = rng.uniform(lo, hi, n_pairs)
    y = rng.uniform(lo, hi, n_pairs)
    ratio = power_difference_ratio(x, y, r)
    return DifferenceBoundReport(r, n_pairs, float(np.max(ratio)) if n_pairs else 0.0)


def sigma_exponent(n: int, e: float) -> float:
    """Gagliardo-Nirenberg interpolation exponent ``n (e - 1) / (2 e)``."""
    return n * (e - 1.0) / (2.0 * e)


@dataclass
class GNReport:
    l2_f: float
    bound: float
    ratio: float
    sigma_p: float | None
    sigma_q: float | None


def gn_bound_report(grid: RadialGrid, kind: NonlinKind, u, v) -> GNReport:
    """Compare ``||f(u,v)||_2`` against ``||u||_{H1}^p + ||v||_{H1}^q``."""
    f, _ = eval_f(kind, u, v)
    l2f = l2_norm(grid, f)
    bound = 0.0
    if kind.p is not None:
        bound += h1_norm(grid, u) ** kind.p
    if kind.q is not None:
        bound += h1_norm(grid, v) ** kind.q
    ratio = l2f / bound if bound > 0 else 0.0
    n = grid.n
    return GNReport(
        l2f, bound, ratio,
        sigma_exponent(n, kind.p) if kind.p is not None else None,
        sigma_exponent(n, kind.q) if kind.q is not None else None,
    )
