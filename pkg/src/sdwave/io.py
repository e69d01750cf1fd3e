"""Configuration files and output writers.

Floats are written with 17 significant digits so that every value
round-trips exactly.  CSV files start with a ``# schema_version`` comment
line followed by the header row; JSON files carry a ``schema_version`` key.
"""

from __future__ import annotations

import configparser
import json
import math
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path

from .blowup import Thresholds
from .errors import ConfigError
from .evolver import Evolver, SolverConfig
from .grid import DomainSpec, build_grid
from .nonlinearity import NonlinKind
from .profiles import make_profile

SCHEMA_VERSION = 1


def fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def csv_text(header, rows) -> str:
    lines = [f"# schema_version: {SCHEMA_VERSION}", ",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def read_csv(path):
    """Parse a file written by :func:`csv_text`; returns ``(header, rows of str)``."""
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def json_text(obj: dict) -> str:
    """Deterministic JSON; non-finite floats become ``null``."""
    body = {"schema_version": SCHEMA_VERSION}
    body.update(_json_safe(obj))
    return json.dumps(body, indent=2, allow_nan=False) + "\n"


class OutputWriter:
    """Single writer for one output directory; records every file it writes."""

    def __init__(self, directory):
        self.dir = Path(directory)
        self.written: list[Path] = []

    def _write(self, name: str, text: str) -> Path:
        path = self.dir / name
        try:
            self.dir.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write {path.resolve()}: {exc.strerror or exc}") from exc
        self.written.append(path)
        return path

    def csv(self, name, header, rows) -> Path:
        return self._write(name, csv_text(header, rows))

    def json(self, name, obj) -> Path:
        return self._write(name, json_text(obj))

    def text(self, name, text) -> Path:
        return self._write(name, text)


ENERGY_COLUMNS = (
    "t", "l2_u", "l2_v", "h1semi_u", "h1semi_v", "h1_u", "h1_v", "l2_f",
    "cum_l2_f", "cum_dissipation",
)
SLOPE_COLUMNS = ("term", "T", "value", "slope", "fit_residual")
TRACE_COLUMNS = ("iteration", "xt_norm", "distance", "ratio")


def energy_rows(series):
    return [tuple(getattr(r, c) for c in ENERGY_COLUMNS) for r in series.records] if series else []


def slope_rows(reports):
    return [(rep.term,) + row for rep in reports for row in rep.rows()]


PLOT_TEMPLATE = '''"""Plot the files emitted next to this script (needs matplotlib)."""
import csv
import os

import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name), encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]

{body}
plt.show()
'''

PLOT_ENERGY = '''
header, rows = read("energy.csv")
t = [float(r[0]) for r in rows]
fig, ax = plt.subplots()
for name in ("h1_u", "h1_v", "l2_f"):
    i = header.index(name)
    ax.semilogy(t, [max(float(r[i]), 1e-300) for r in rows], label=name)
ax.set_xlabel("t")
ax.legend()
'''

PLOT_SLOPES = '''
header, rows = read("slopes.csv")
fig, ax = plt.subplots()
for term in sorted({r[0] for r in rows}):
    pts = [(float(r[1]), float(r[2])) for r in rows if r[0] == term]
    ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=term)
ax.set_xlabel("T")
ax.legend()
'''

PLOT_TRACE = '''
header, rows = read("picard_trace.csv")
fig, ax = plt.subplots()
ax.semilogy([int(r[0]) for r in rows], [max(float(r[2]), 1e-300) for r in rows], "o-")
ax.set_xlabel("iteration")
ax.set_ylabel("distance")
'''


def write_outputs(series=None, reports=None, directory=".", *, writer: OutputWriter | None = None):
    """Write the energy CSV, verdict JSON, slope CSV, trace CSV and a plot script.

    ``reports`` may hold ``verdict`` (a blow-up verdict), ``slopes`` (slope
    reports), ``trace`` (a Picard trace) and ``estimates`` (a flat dict).
    Only the parts present are written; the plot script references only
    those files.
    """
    reports = reports or {}
    w = writer or OutputWriter(directory)
    body = []
    if series is not None:
        w.csv("energy.csv", ENERGY_COLUMNS, energy_rows(series))
        body.append(PLOT_ENERGY)
    if reports.get("verdict") is not None:
        w.json("verdict.json", reports["verdict"].to_dict())
    if reports.get("estimates") is not None:
        w.json("estimates.json", reports["estimates"])
    if reports.get("slopes"):
        w.csv("slopes.csv", SLOPE_COLUMNS, slope_rows(reports["slopes"]))
        body.append(PLOT_SLOPES)
    if reports.get("trace") is not None:
        w.csv("picard_trace.csv", TRACE_COLUMNS, reports["trace"].rows())
        body.append(PLOT_TRACE)
    if body:
        w.text("plot_outputs.py", PLOT_TEMPLATE.format(body="".join(body)))
    return list(w.written)


# configuration -----------------------------------------------------------------
_SECTIONS = {
    "domain": ("n", "r_obs", "r_out", "j_max"),
    "solver": ("dt", "theta", "t_end", "store_every"),
    "nonlinearity": ("kind", "p", "q"),
    "data": ("profile", "amplitude", "center", "width", "u0_profile", "u0_amplitude"),
    "thresholds": ("factor", "max_steps"),
    "sweep": ("p_grid", "q_grid", "amplitudes", "workers"),
    "output": ("output_dir", "seed"),
}


@dataclass(frozen=True)
class RunConfig:
    n: int = 1
    r_obs: float = 0.0
    r_out: float = 40.0
    j_max: int = 400
    dt: float = 0.0125
    theta: float = 0.5
    t_end: float = 20.0
    store_every: int = 1
    kind: str = "derivative"
    p: float | None = None
    q: float | None = 1.2
    profile: str = "sigma"
    amplitude: float = 1.0
    center: float | None = None
    width: float | None = None
    u0_profile: str | None = None
    u0_amplitude: float = 0.0
    factor: float = 1e6
    max_steps: int | None = None
    p_grid: tuple = ()
    q_grid: tuple = ()
    amplitudes: tuple = (0.5, 1.0, 2.0, 5.0, 10.0)
    workers: int = 1
    output_dir: str = "out"
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("derivative", "mixed", "power", "none"):
            raise ConfigError(f"unknown nonlinearity kind {self.kind!r}")
        for name in ("p_grid", "q_grid", "amplitudes"):
            object.__setattr__(self, name, tuple(float(x) for x in getattr(self, name)))
        if int(self.workers) != self.workers or self.workers < 1:
            raise ConfigError("workers must be a positive integer")

    # derived objects
    def domain(self):
        return DomainSpec(self.n, self.r_obs, self.r_out)

    def grid(self):
        return build_grid(self.domain(), self.j_max)

    def solver(self):
        return SolverConfig(self.dt, self.theta, self.t_end, self.store_every)

    def nonlinearity(self, p=None, q=None):
        if self.kind == "none":
            return None
        p = self.p if p is None else p
        q = self.q if q is None else q
        return NonlinKind(self.kind, p=p if self.kind != "derivative" else None,
                          q=q if self.kind != "power" else None)

    def thresholds(self):
        return Thresholds(factor=self.factor, max_steps=self.max_steps)

    def data(self, grid=None, amplitude=None):
        g = grid if grid is not None else self.grid()
        a = self.amplitude if amplitude is None else amplitude
        u1 = make_profile(g, self.profile, a, self.center, self.width)
        if self.u0_profile:
            u0 = make_profile(g, self.u0_profile, self.u0_amplitude * a / max(self.amplitude, 1e-300),
                              self.center, self.width)
        else:
            u0 = 0.0 * u1
        return u0, u1

    def validate(self):
        """Build every derived object once so that errors surface before any output."""
        g = self.grid()
        self.solver()
        self.nonlinearity()
        self.thresholds()
        self.data(g)
        Evolver(g, self.solver())
        return self

    # serialization
    def to_ini(self) -> str:
        lines = []
        for sec, keys in _SECTIONS.items():
            lines.append(f"[{sec}]")
            for k in keys:
                v = getattr(self, k)
                if isinstance(v, tuple):
                    text = ", ".join(fmt(x) for x in v)
                else:
                    text = "none" if v is None else fmt(v)
                lines.append(f"{k} = {text}")
            lines.append("")
        return "\n".join(lines)

    @classmethod
    def from_ini(cls, text: str) -> "RunConfig":
        cp = configparser.ConfigParser(interpolation=None)
        try:
            cp.read_string(text)
        except configparser.Error as exc:
            raise ConfigError(f"malformed config: {exc}") from None
        known = {k: sec for sec, keys in _SECTIONS.items() for k in keys}
        types = {f.name: f for f in fields(cls)}
        kw = {}
        for sec in cp.sections():
            if sec not in _SECTIONS:
                raise ConfigError(f"unknown section [{sec}]")
            for k, raw in cp[sec].items():
                if known.get(k) != sec:
                    raise ConfigError(f"unknown key {k!r} in section [{sec}]")
                kw[k] = _parse(types[k], raw.strip())
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "RunConfig":
        p = Path(path)
        if not p.is_file():
            raise ConfigError(f"config file not found: {p}")
        return cls.from_ini(p.read_text(encoding="utf-8"))

    def with_env(self, environ=None) -> "RunConfig":
        """Apply ``SDWAVE_OUTPUT_DIR`` and ``SDWAVE_WORKERS`` overrides."""
        env = os.environ if environ is None else environ
        kw = {}
        if env.get("SDWAVE_OUTPUT_DIR"):
            kw["output_dir"] = env["SDWAVE_OUTPUT_DIR"]
        if env.get("SDWAVE_WORKERS"):
            try:
                kw["workers"] = int(env["SDWAVE_WORKERS"])
            except ValueError:
                raise ConfigError("SDWAVE_WORKERS must be an integer") from None
        return replace(self, **kw)


def _parse(f, raw: str):
    name = f.name
    if name in ("kind", "profile", "output_dir"):
        return raw
    if raw.lower() == "none":
        return None
    try:
        if name in ("p_grid", "q_grid", "amplitudes"):
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if name in ("n", "j_max", "store_every", "max_steps", "workers", "seed"):
            return int(raw)
        if name == "u0_profile":
            return raw
        return float(raw)
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None
