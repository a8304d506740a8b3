import csv
import subprocess
import sys

import pytest

from geoexp.harness.cli import main
from geoexp.harness.config import (ConfigError, ExperimentConfig, SweepConfig, parse_methods,
                                   read_config_file)
from geoexp.harness.experiments import Check
from geoexp.harness.plotting import SchemaError, build_plot_script


def rows(path):
    with open(path) as fh:
        return [r for r in csv.reader(l for l in fh if not l.startswith("#"))]


def test_experiment_config_validation():
    ExperimentConfig(method="midpoint", solver="newton")
    ExperimentConfig(method="dg", solver="newton")
    for bad in (dict(method="exp_midpoint", solver="newton"), dict(method="rk4"),
                dict(model="heat"), dict(N=10), dict(h=0.0), dict(steps=0), dict(tol=-1),
                dict(nu=0), dict(seed=-1)):
        with pytest.raises(ConfigError):
            ExperimentConfig(**bad)


def test_sweep_config_validation():
    assert SweepConfig(model="kdv").grid_top == 0.005
    assert SweepConfig(model="nls").grid_top == 0.1
    with pytest.raises(ConfigError):
        SweepConfig(Ns=(10,))
    with pytest.raises(ConfigError):
        SweepConfig(horizon_steps=20)
    with pytest.raises(ConfigError):
        SweepConfig(methods=(("energy_exp", "newton"),))


def test_parse_methods():
    assert parse_methods("midpoint, dg:newton", "fixed_point") == (
        ("midpoint", "fixed_point"), ("dg", "newton"))
    with pytest.raises(ConfigError):
        parse_methods(" , ")


def test_read_config_file(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\nmodel = kdv\nmax-iterations=7  # trailing\n\n")
    assert read_config_file(p) == {"model": "kdv", "max_iterations": "7"}
    p.write_text("oops\n")
    with pytest.raises(ConfigError):
        read_config_file(p)


def test_integrate_csv(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["integrate", "--model", "kdv", "--N", "31", "--method", "energy_exp",
                 "--h", "0.005", "--steps", "20", "--tol", "1e-13", "-o", str(out)]) == 0
    text = out.read_text()
    assert text.startswith("# ")
    r = rows(out)
    assert r[0] == ["step", "t", "energy_error", "iterations", "residual"]
    assert len(r) == 22
    assert max(abs(float(x[2])) for x in r[1:]) < 1e-10


def test_integrate_reference_column(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["integrate", "--N", "11", "--method", "midpoint", "--steps", "3",
                 "--reference", "-o", str(out)]) == 0
    r = rows(out)
    assert r[0] == ["step", "t", "energy_error", "traj_error", "iterations", "residual"]
    errs = [float(x[3]) for x in r[1:]]
    assert errs[0] == 0 and 0 < errs[1] < errs[3] < 1e-5


def test_integrate_divergence_keeps_partial_csv(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["integrate", "--method", "midpoint", "--N", "161", "--h", "0.1",
                 "-o", str(out)]) == 2
    r = rows(out)
    assert len(r) == 3 and r[-1][0] == "1"


def test_integrate_deterministic(tmp_path):
    args = ["integrate", "--N", "11", "--steps", "5", "--method", "disex6"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(args + ["-o", str(a)]) == 0 and main(args + ["-o", str(b)]) == 0
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("#")]
    assert strip(a) == strip(b)


def test_usage_errors(tmp_path, capsys):
    assert main(["integrate", "--method", "exp_midpoint", "--solver", "newton"]) == 1
    assert main(["integrate", "--N", "10"]) == 1
    assert main(["frobnicate"]) == 1
    assert main([]) == 1
    assert main(["integrate", "--h", "abc"]) == 1
    assert main(["integrate", "-o", str(tmp_path / "missing" / "x.csv")]) == 1
    assert "error" in capsys.readouterr().err


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("model = kdv\nN = 21\nmethod = energy_exp\nh = 0.005\nsteps = 50\n")
    out = tmp_path / "t.csv"
    assert main(["integrate", "--config", str(cfg), "--steps", "4", "-o", str(out)]) == 0
    assert "model=kdv" in out.read_text().splitlines()[0]
    assert len(rows(out)) == 6
    cfg.write_text("colour = blue\n")
    assert main(["integrate", "--config", str(cfg)]) == 1
    assert main(["integrate", "--config", str(tmp_path / "nope.cfg")]) == 1


def test_sweep_linear_converges_everywhere(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--Ns", "11,21", "--methods", "exp_euler,exp_midpoint,disex6,energy_exp",
                 "--linear", "--full-grid", "--h-min", "0.01", "--horizon-time", "0",
                 "--workers", "1", "-o", str(out)]) == 0
    text = out.read_text()
    detail, summary = text.split("# summary\n")
    drows = [r for r in csv.reader(l for l in detail.splitlines() if not l.startswith("#"))]
    assert drows[0] == ["method", "solver", "N", "h", "converged", "max_iterations_observed"]
    body = drows[1:]
    assert body and all(r[4] == "1" for r in body)
    assert all(r[5] == "1" for r in body if r[0] != "exp_euler")
    srows = list(csv.reader(summary.splitlines()))
    assert srows[0] == ["method", "solver", "N", "h_max"]
    assert len(srows) == 9


def test_sweep_worker_pool_same_output(tmp_path):
    base = ["sweep", "--Ns", "11,21", "--methods", "midpoint,energy_exp", "--horizon-time", "0"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(base + ["--workers", "1", "-o", str(a)]) == 0
    assert main(base + ["--workers", "2", "-o", str(b)]) == 0
    strip = lambda p: [l for l in p.read_text().splitlines() if not l.startswith("# geoexp")]
    assert strip(a) == strip(b)


def test_verify_suites(capsys):
    assert main(["verify", "composition"]) == 0
    out = capsys.readouterr().out
    assert "[PASS] DISEX composition vs tableau" in out
    assert main(["verify", "poisson"]) == 0
    assert "negative control" in capsys.readouterr().out
    assert main(["verify", "structure"]) == 0


def test_verify_failure_exit_code(monkeypatch):
    import geoexp.harness.cli as cli
    monkeypatch.setattr(cli, "run_suite", lambda name, seed=0: [Check("x", 1.0, 0.5, False)])
    assert cli.main(["verify", "structure"]) == 3


def test_plot_script(tmp_path):
    t = tmp_path / "t.csv"
    s = tmp_path / "s.csv"
    main(["integrate", "--N", "11", "--steps", "3", "-o", str(t)])
    main(["sweep", "--Ns", "11", "--methods", "midpoint,energy_exp", "--horizon-time", "0",
          "--workers", "1", "-o", str(s)])
    script = tmp_path / "p.py"
    assert main(["plot-script", str(s), str(t), "-o", str(script)]) == 0
    code = script.read_text()
    compile(code, str(script), "exec")
    assert "'midpoint:fixed_point', 'energy_exp:fixed_point'" in code
    assert "traj_error" not in code
    main(["integrate", "--N", "11", "--steps", "3", "--reference", "-o", str(t)])
    assert main(["plot-script", str(t), "-o", str(script)]) == 0
    assert "traj_error" in script.read_text()


def test_plot_script_rejects_bad_csv(tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("")
    script = tmp_path / "p.py"
    assert main(["plot-script", str(empty), "-o", str(script)]) == 1
    assert not script.exists()
    odd = tmp_path / "o.csv"
    odd.write_text("a,b\n1,2\n")
    assert main(["plot-script", str(odd), "-o", str(script)]) == 1
    assert main(["plot-script", str(tmp_path / "none.csv"), "-o", str(script)]) == 1
    with pytest.raises(SchemaError):
        build_plot_script([])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "geoexp", "verify", "composition"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "2/2 checks passed" in r.stdout
