import re

import numpy as np
import pytest

from kdlr.cli import main
from kdlr.config import parse_config
from kdlr.diagnostics import read_history_csv
from kdlr.mesh import ConfigurationError

MINIMAL = """
solver = lowrank
ic = local_equilibrium
epsilon = 1e-6
t_final = 0.002
nx = 16
nv = 24
r = 3
"""


def test_minimal_config_defaults_and_echo():
    cfg = parse_config(MINIMAL)
    assert cfg.cfl == 0.25 and cfg.gmres_tol == 1e-10 and cfg.gmres_restart == 30
    assert cfg.d == 1 and (cfg.v_min, cfg.v_max) == (-10.0, 10.0)
    assert parse_config(cfg.echo()) == cfg


def test_sectioned_config():
    text = "[run]\nsolver = fluid\nic = bump_on_tail\n[numerics]\nepsilon = 1\nt_final = 0.1\nnx = 8\nnv = 8  # unused by fluid\n"
    assert parse_config(text).solver == "fluid"


@pytest.mark.parametrize(
    "extra,match",
    [
        ("solver = fluid\n", "'r'"),
        ("bogus = 1\n", "unknown key 'bogus'"),
        ("nx = 32\n", "'nx'"),
        ("cfl = abc\n", "'cfl'"),
    ],
)
def test_rejections(extra, match):
    text = MINIMAL.replace("solver = lowrank\n", "") if extra.startswith("solver") else MINIMAL
    with pytest.raises(ConfigurationError, match=match):
        parse_config(text + extra)


def test_incompatible_dimension():
    with pytest.raises(ConfigurationError, match="'d'"):
        parse_config(MINIMAL.replace("local_equilibrium", "cold_beam_2d") + "d = 1\n")


def test_missing_required_key():
    with pytest.raises(ConfigurationError, match="'nv'"):
        parse_config(MINIMAL.replace("nv = 24\n", ""))


def test_lowrank_requires_rank():
    with pytest.raises(ConfigurationError, match="'r'"):
        parse_config(MINIMAL.replace("r = 3\n", ""))


def scripts_reference_only_emitted(out):
    for gp in out.glob("*.gp"):
        for line in gp.read_text().splitlines():
            if line.startswith("set output"):
                continue
            for name in re.findall(r"'([^']+\.\w+)'", line):
                assert (out / name).exists(), f"{gp.name} references missing {name}"


def test_run_lowrank(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(MINIMAL + "snapshot_every = 2\ndt = 2.5e-4\n")
    out = tmp_path / "out"
    assert main(["run", str(cfg), "--output", str(out), "--threads", "1"]) == 0
    h = read_history_csv(out / "history.csv")
    assert len(h["t"]) == 9 and h["t"][-1] == pytest.approx(0.002)
    assert "sigma3" in h
    assert (out / "final.kdlr").exists() and (out / "snapshot_000004.kdlr").exists()
    scripts_reference_only_emitted(out)


def test_fluid_mass_constant(tmp_path):
    cfg = tmp_path / "f.cfg"
    cfg.write_text("solver=fluid\nic=bump_on_tail\nepsilon=1e-6\nt_final=0.05\nnx=64\nnv=16\ndt=1e-3\n")
    out = tmp_path / "o"
    assert main(["run", str(cfg), "--output", str(out)]) == 0
    m = read_history_csv(out / "history.csv")["mass"]
    assert np.abs(m - m[0]).max() <= 1e-12 * m[0]
    scripts_reference_only_emitted(out)


def test_reruns_bit_identical(tmp_path):
    cfg = tmp_path / "a.cfg"
    cfg.write_text(MINIMAL + "record_timing = false\n")
    for name in ("x", "y"):
        assert main(["run", str(cfg), "--output", str(tmp_path / name)]) == 0
    assert (tmp_path / "x" / "history.csv").read_bytes() == (tmp_path / "y" / "history.csv").read_bytes()


def test_fulltensor_run(tmp_path, monkeypatch):
    monkeypatch.setenv("KDLR_THREADS", "1")
    cfg = tmp_path / "a.cfg"
    cfg.write_text(MINIMAL.replace("lowrank", "fulltensor").replace("r = 3\n", ""))
    assert main(["run", str(cfg), "--output", str(tmp_path / "o")]) == 0
    scripts_reference_only_emitted(tmp_path / "o")


def test_custom_initial_condition(tmp_path):
    nx, nv = 16, 24
    v = np.linspace(-10, 10, nv)
    x = np.arange(nx) / nx
    f0 = (1 + 0.2 * np.cos(2 * np.pi * x))[:, None] * np.exp(-0.5 * v**2)[None, :] / np.sqrt(2 * np.pi)
    np.save(tmp_path / "f0.npy", f0)
    cfg = tmp_path / "c.cfg"
    cfg.write_text(MINIMAL.replace("local_equilibrium", "custom") + f"d = 1\ncustom_f0 = {tmp_path / 'f0.npy'}\n")
    assert main(["run", str(cfg), "--output", str(tmp_path / "o")]) == 0


def test_convergence_and_bench_commands(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text(
        "solver=lowrank\nic=counterstreaming\nepsilon=0.5\nt_final=0.001\nnx=16\nnv=33\nr=4\ndt=2e-4\n"
        "sweep_axis=x\nsweep_sizes=8,16,32,64\n"
    )
    out = tmp_path / "conv"
    assert main(["convergence", str(cfg), "--output", str(out)]) == 0
    assert (out / "slopes.txt").read_text().startswith("x ")
    assert len((out / "convergence.csv").read_text().splitlines()) == 4
    scripts_reference_only_emitted(out)
    b = tmp_path / "b.cfg"
    b.write_text(
        "solver=lowrank\nic=potential_hill_2d\nepsilon=1\nt_final=1\nnx=8\nnv=8\nr=2\n"
        "bench_sizes=6,12\nbench_ranks=2\nbench_steps=2\n"
    )
    out = tmp_path / "bench"
    assert main(["bench", str(b), "--output", str(out)]) == 0
    rows = (out / "timings.csv").read_text().splitlines()
    assert rows[0] == "n,solver,r,median_ms,normalized,exponent" and len(rows) == 5
    scripts_reference_only_emitted(out)


def test_failures_exit_nonzero(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(MINIMAL + "bogus = 2\n")
    assert main(["run", str(cfg)]) == 1
    assert "bogus" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.cfg")]) == 1
    with pytest.raises(SystemExit):
        main(["frobnicate", str(cfg)])
