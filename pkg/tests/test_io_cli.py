import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sdwave import ConfigError
from sdwave.blowup import Verdict
from sdwave.cli import cli
from sdwave.diagnostics import EnergyTimeSeries
from sdwave.io import RunConfig, csv_text, fmt, json_text, read_csv, write_outputs
from sdwave.sweep import SweepPlan, run_sweep

SMALL_RUN = """
[domain]
n = 1
r_out = 40
j_max = 400
[solver]
dt = 0.0125
t_end = 20
[nonlinearity]
kind = derivative
q = 1.2
[data]
amplitude = 5
"""

SMALL_PICARD = """
[domain]
n = 1
r_out = 20
j_max = 200
[solver]
dt = 0.02
[nonlinearity]
kind = mixed
p = 2
q = 2
"""

SMALL_SWEEP = """
[domain]
n = 1
j_max = 200
[solver]
t_end = 10
[nonlinearity]
kind = mixed
[sweep]
p_grid = 2, 4
q_grid = 1.2, 2.5
amplitudes = 0.5, 2
"""


def write(tmp_path, text, name="c.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


# formats ---------------------------------------------------------------------
def test_fmt_floats_round_trip():
    for x in (0.1, 1 / 3, 1e-300, 2.5e17, -7.0):
        assert float(fmt(x)) == x
    assert fmt(None) == "" and fmt(True) == "true" and fmt(3) == "3"


def test_csv_schema_line_and_parse(tmp_path):
    text = csv_text(("a", "b"), [(1, 0.1), (2, 1 / 3)])
    assert text.startswith("# schema_version: 1\na,b\n")
    p = tmp_path / "x.csv"
    p.write_text(text)
    header, rows = read_csv(p)
    assert header == ["a", "b"] and float(rows[1][1]) == 1 / 3


def test_json_nonfinite_to_null_and_stable():
    text = json_text({"a": math.inf, "b": [1.5, math.nan]})
    obj = json.loads(text)
    assert obj == {"schema_version": 1, "a": None, "b": [1.5, None]}
    assert json_text({k: v for k, v in obj.items() if k != "schema_version"}) == text


def test_empty_series_header_only(tmp_path):
    files = write_outputs(EnergyTimeSeries([], 0.1), {}, tmp_path)
    lines = (tmp_path / "energy.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("t,l2_u")
    assert [f.name for f in files] == ["energy.csv", "plot_outputs.py"]


def test_verdict_json_reserializes_identically(tmp_path):
    v = Verdict("BlowupAt", 20.0, 1.2345678901234567e7, t_est=4.1 / 3, t_last_stable=1.3,
                kappa=2.000000000000001, refinement_confirmed=True, sign_functional=0.1)
    write_outputs(None, {"verdict": v}, tmp_path)
    raw = (tmp_path / "verdict.json").read_text()
    obj = json.loads(raw)
    assert json.dumps(obj, indent=2, allow_nan=False) + "\n" == raw
    assert obj["t_est"] == 4.1 / 3
    assert not (tmp_path / "plot_outputs.py").exists()


def test_unwritable_directory_reports_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match=str(blocker)):
        write_outputs(EnergyTimeSeries([], 0.1), {}, blocker / "sub")


# config ----------------------------------------------------------------------
def test_config_defaults_round_trip():
    c = RunConfig()
    assert RunConfig.from_ini(c.to_ini()) == c


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 4),
    r_out=st.floats(4.0, 100.0),
    dt=st.floats(1e-4, 0.5),
    theta=st.floats(0.5, 1.0),
    kind=st.sampled_from(["derivative", "mixed", "power", "none"]),
    p=st.one_of(st.none(), st.floats(1.01, 9.0)),
    q=st.one_of(st.none(), st.floats(1.01, 9.0)),
    amps=st.lists(st.floats(0.01, 50.0), max_size=4),
    max_steps=st.one_of(st.none(), st.integers(1, 10**6)),
    out=st.text(st.characters(whitelist_categories=("Ll", "Nd")), min_size=1, max_size=12),
)
def test_config_round_trip_property(n, r_out, dt, theta, kind, p, q, amps, max_steps, out):
    c = RunConfig(n=n, r_obs=0.0 if n == 1 else 1.0, r_out=r_out, dt=dt, theta=theta, kind=kind,
                  p=p, q=q, amplitudes=tuple(amps), max_steps=max_steps, output_dir=out)
    assert RunConfig.from_ini(c.to_ini()) == c


@pytest.mark.parametrize("text", [
    "[domain]\nn = 1\n[bogus]\nx = 1\n",
    "[domain]\nq = 1.2\n",
    "[domain]\nn = one\n",
    "[nonlinearity]\nkind = cubic\n",
    "no section header\n",
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        RunConfig.from_ini(text)


def test_env_overrides():
    c = RunConfig().with_env({"SDWAVE_OUTPUT_DIR": "/tmp/o", "SDWAVE_WORKERS": "3"})
    assert c.output_dir == "/tmp/o" and c.workers == 3
    with pytest.raises(ConfigError):
        RunConfig().with_env({"SDWAVE_WORKERS": "many"})


def test_validate_catches_dt_above_dx():
    with pytest.raises(ConfigError):
        RunConfig(j_max=16, dt=5.0).validate()


# sweep -------------------------------------------------------------------------
def test_sweep_plan_validation():
    with pytest.raises(ConfigError):
        SweepPlan(n=1, kind="power")
    with pytest.raises(ConfigError):
        SweepPlan(n=1, kind="mixed", q_grid=(1.5, 1.2))
    with pytest.raises(ConfigError):
        SweepPlan(n=3, kind="derivative", q_grid=(1.2, 4.0), local_theory=True)


def test_sweep_labels_and_agreement():
    plan = SweepPlan(n=1, kind="derivative", q_grid=(1.2, 3.0), amplitudes=(0.01, 2.0),
                     j_max=200, t_end=10.0)
    res = run_sweep(plan)
    assert [r.index for r in res.runs] == [0, 1, 2, 3]
    labels = {(r.q, r.amplitude): r.label for r in res.runs}
    assert labels[(1.2, 2.0)] == "theory-consistent-blowup"
    assert labels[(3.0, 0.01)] == "no-blowup-within-budget"
    assert res.agreement()[(None, 1.2)] is True
    assert res.agreement_rate() == 1.0


# cli ---------------------------------------------------------------------------
def test_cli_theory(capsys):
    assert cli(["theory", "--n", "3", "--q", "1.3333333333", "--kind", "derivative"]) == 0
    out = capsys.readouterr().out
    assert "membership: true" in out and "boundary: true" in out


def test_cli_theory_mixed_needs_p(capsys):
    assert cli(["theory", "--n", "1", "--q", "1.2", "--kind", "mixed"]) == 1


def test_cli_verify_constants(capsys):
    assert cli(["verify", "--suite", "constants"]) == 0
    out = capsys.readouterr().out
    assert "alpha1 = 1.28077640640442" in out and "alpha2 = 1.61803398874989" in out


def test_cli_unknown_flag(capsys):
    assert cli(["theory", "--bogus"]) == 1
    assert "usage:" in capsys.readouterr().err


def test_cli_missing_config_writes_nothing(tmp_path, capsys, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert cli(["run", "--config", "missing.ini", "--out", "o"]) == 1
    assert list(tmp_path.iterdir()) == []


def test_cli_bad_config_writes_nothing(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = write(tmp_path, "[domain]\nj_max = 16\n[solver]\ndt = 5\n")
    assert cli(["run", "--config", cfg, "--out", "o"]) == 1
    assert not (tmp_path / "o").exists()


def test_cli_run_outputs(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_RUN)
    out = tmp_path / "o"
    assert cli(["run", "--config", cfg, "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["energy.csv", "estimates.json", "plot_outputs.py",
                                                      "verdict.json"]
    v = json.loads((out / "verdict.json").read_text())
    assert v["tag"] == "BlowupAt" and v["refinement_confirmed"] is True
    assert "confirmed" in capsys.readouterr().out


def test_cli_run_env_output_dir(tmp_path, monkeypatch):
    cfg = write(tmp_path, SMALL_RUN)
    monkeypatch.setenv("SDWAVE_OUTPUT_DIR", str(tmp_path / "env"))
    assert cli(["run", "--config", cfg]) == 0
    assert (tmp_path / "env" / "energy.csv").exists()


def test_cli_picard(tmp_path, capsys):
    cfg = write(tmp_path, SMALL_PICARD)
    assert cli(["picard", "--config", cfg, "--T", "0.4", "--out", str(tmp_path / "o")]) == 0
    assert "status: converged" in capsys.readouterr().out
    assert (tmp_path / "o" / "picard_trace.csv").exists()


def test_cli_picard_divergence_is_numeric_failure(tmp_path):
    cfg = write(tmp_path, SMALL_PICARD.replace("[solver]", "[data]\namplitude = 5\n[solver]"))
    assert cli(["picard", "--config", cfg, "--T", "4", "--out", str(tmp_path / "o")]) == 2


def test_cli_sweep_is_deterministic(tmp_path):
    cfg = write(tmp_path, SMALL_SWEEP)
    assert cli(["sweep", "--config", cfg, "--out", str(tmp_path / "a"), "--workers", "1"]) == 0
    assert cli(["sweep", "--config", cfg, "--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    for name in ("phase.csv", "overlay.csv", "plot_phase.py"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
