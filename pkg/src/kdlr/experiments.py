"""Config-driven experiment runs: time loop, history CSV, snapshots and
gnuplot scripts, plus the grid-convergence sweep and the timing harness.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .checkpoint import save_full, save_low_rank
from .config import ExperimentConfig
from .diagnostics import RunHistory, l1_diff, maxwellian_distance, observed_order
from .field import gauss_residual
from .initial import PROBLEMS, InitialData, low_rank_initial, prepare
from .mesh import ConfigurationError, Grid, build_grid, cfl_timestep
from .moments import dense_moments, maxwellian
from .reference import FluidState, FullTensorState, fluid_step, full_tensor_step
from .splitting import StepOptions, advance, make_field
from .state import reconstruct_f

log = logging.getLogger(__name__)


def make_grid(cfg: ExperimentConfig) -> Grid:
    return build_grid(cfg.d, (0.0, 1.0), cfg.nx, (cfg.v_min, cfg.v_max), cfg.nv)


def initial_data(cfg: ExperimentConfig, grid: Grid) -> InitialData:
    if cfg.ic == "custom":
        f0 = np.load(cfg.custom_f0)
        if f0.shape != (grid.nx, grid.nv):
            raise ConfigurationError(f"key 'custom_f0': expected shape {(grid.nx, grid.nv)}, got {f0.shape}")
        rho, _ = dense_moments(f0, grid)
        eta = np.load(cfg.custom_eta) if cfg.custom_eta else rho.copy()
        data = InitialData(rho, np.asarray(eta, dtype=float).ravel(), lambda E: f0)
    else:
        data = PROBLEMS[cfg.ic][0](grid)
    return prepare(data, grid)


def time_step(cfg: ExperimentConfig, grid: Grid) -> float:
    if cfg.dt is not None:
        return cfg.dt
    return cfl_timestep(grid, max(abs(cfg.v_min), abs(cfg.v_max)), cfg.cfl)


def step_plan(t_final: float, dt: float) -> tuple[int, float]:
    """Number of equal steps reaching ``t_final`` with a step no larger than ``dt``."""
    n = max(1, int(np.ceil(t_final / dt - 1e-9)))
    return n, t_final / n


def step_options(cfg: ExperimentConfig) -> StepOptions:
    return StepOptions(
        gmres_tol=cfg.gmres_tol,
        gmres_restart=cfg.gmres_restart,
        gmres_maxiter=cfg.gmres_max_iter,
        preconditioner=cfg.preconditioner,
    )


class LowRankRun:
    kind = "lowrank"

    def __init__(self, cfg, grid, data):
        self.grid, self.eps = grid, cfg.epsilon
        self.options = step_options(cfg)
        self.state = low_rank_initial(data, cfg.r, grid)
        self.field = make_field(self.state, data.E, data.eta, grid, self.options)
        self.sigma = np.linalg.svd(self.state.S, compute_uv=False)
        self.n = 0

    def step(self, dt):
        self.state, self.field, rep = advance(self.state, self.field, self.grid, dt, self.eps, self.options, self.n)
        self.sigma = rep.sigma
        self.n += 1

    def f(self):
        return reconstruct_f(self.state, self.field.E, self.grid)

    def record(self):
        g, fld = self.grid, self.field
        return (
            self.sigma,
            float(np.sum(fld.rho) * g.dx_vol),
            gauss_residual(fld.E, fld.rho, fld.eta, g),
            maxwellian_distance(self.f(), fld.E, g),
        )

    def save(self, path):
        save_low_rank(path, self.state, self.grid.d)
        np.save(str(path) + ".E.npy", self.field.E)


class FullTensorRun:
    kind = "fulltensor"

    def __init__(self, cfg, grid, data):
        self.grid, self.eps = grid, cfg.epsilon
        self.state = FullTensorState(data.f.copy(), data.E.copy())
        self.eta = data.eta

    def step(self, dt):
        self.state = full_tensor_step(self.state, self.grid, dt, self.eps)

    def f(self):
        return self.state.f

    def record(self):
        g = self.grid
        rho, _ = dense_moments(self.state.f, g)
        return (
            None,
            float(np.sum(rho) * g.dx_vol),
            gauss_residual(self.state.E, rho, self.eta, g),
            maxwellian_distance(self.state.f, self.state.E, g),
        )

    def save(self, path):
        save_full(path, self.state.f, self.grid.d)
        np.save(str(path) + ".E.npy", self.state.E)


class FluidRun:
    kind = "fluid"

    def __init__(self, cfg, grid, data):
        self.grid = grid
        self.state = FluidState(data.rho.copy(), data.E.copy())
        self.eta = data.eta

    def step(self, dt):
        self.state = fluid_step(self.state, self.grid, dt)

    def f(self):
        return self.state.rho[:, None] * maxwellian(self.state.E, self.grid)

    def record(self):
        g = self.grid
        return None, self.state.mass(g), gauss_residual(self.state.E, self.state.rho, self.eta, g), 0.0

    def save(self, path):
        np.save(str(path) + ".rho.npy", self.state.rho)
        np.save(str(path) + ".E.npy", self.state.E)


RUNNERS = {"lowrank": LowRankRun, "fulltensor": FullTensorRun, "fluid": FluidRun}


@dataclass
class RunResult:
    config: ExperimentConfig
    grid: Grid
    history: RunHistory
    runner: object
    dt: float
    files: list = field(default_factory=list)


def _history_script(history: RunHistory, kind: str) -> str:
    lines = [
        "set datafile separator ','",
        "set key autotitle columnhead",
        "set xlabel 't'",
        "set terminal pngcairo size 900,600",
    ]
    if history.rank:
        lines += [
            "set output 'singular_values.png'",
            "set logscale y",
            "set ylabel 'sigma_i / sigma_1'",
            f"plot for [i=2:{history.rank + 1}] 'history.csv' using 1:(column(i)/column(2)) with lines",
            "unset logscale y",
        ]
    m = history.rank + 2
    lines += [
        "set output 'conservation.png'",
        "set multiplot layout 2,1",
        f"plot 'history.csv' using 1:{m} with lines",
        f"plot 'history.csv' using 1:{m + 1} with lines",
        "unset multiplot",
    ]
    if kind != "fluid":
        lines += [
            "set output 'relaxation.png'",
            "set logscale y",
            f"plot 'history.csv' using 1:{m + 2} with lines",
        ]
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig, output: str | Path | None = None, write: bool = True) -> RunResult:
    grid = make_grid(cfg)
    data = initial_data(cfg, grid)
    dt_max = time_step(cfg, grid)
    nsteps, dt = step_plan(cfg.t_final, dt_max)
    runner = RUNNERS[cfg.solver](cfg, grid, data)
    history = RunHistory()
    history.append(0.0, *runner.record(), 0.0)
    out = Path(output if output is not None else cfg.output)
    files = []
    if write:
        out.mkdir(parents=True, exist_ok=True)
    log.info("%s run: %d steps of %.6g to t = %.6g", cfg.solver, nsteps, dt, cfg.t_final)
    for n in range(1, nsteps + 1):
        t0 = time.perf_counter()
        runner.step(dt)
        wall = 1e3 * (time.perf_counter() - t0) if cfg.record_timing else 0.0
        history.append(n * dt, *runner.record(), wall)
        if write and cfg.snapshot_every and n % cfg.snapshot_every == 0 and n != nsteps:
            path = out / f"snapshot_{n:06d}.kdlr"
            runner.save(path)
            files.append(path)
    if write:
        path = out / "final.kdlr"
        runner.save(path)
        files.append(path)
        history.write_csv(out / "history.csv")
        (out / "history.gp").write_text(_history_script(history, runner.kind))
        (out / "config.echo").write_text(cfg.echo())
        files += [out / "history.csv", out / "history.gp", out / "config.echo"]
    return RunResult(cfg, grid, history, runner, dt, files)


@dataclass
class ConvergenceResult:
    sizes: tuple
    spacings: np.ndarray
    diffs: np.ndarray
    slope: float


def run_convergence(cfg: ExperimentConfig, output: str | Path | None = None, write: bool = True) -> ConvergenceResult:
    """Successive-difference study over ``cfg.sweep_sizes`` along ``cfg.sweep_axis``.

    Every level uses the same time step (``cfg.dt``, or the CFL step of the
    finest grid) and the same final time.
    """
    sizes = tuple(sorted(cfg.sweep_sizes))
    if len(sizes) < 4:
        raise ConfigurationError("key 'sweep_sizes' needs at least four grids for three differences")
    key = "nx" if cfg.sweep_axis == "x" else "nv"
    levels = [replace(cfg, **{key: n}) for n in sizes]
    if cfg.dt is None:
        finest = make_grid(levels[-1])
        dt = time_step(levels[-1], finest)
        levels = [replace(c, dt=dt) for c in levels]
    sols = []
    for c in levels:
        res = run_experiment(c, write=False)
        sols.append((res.grid, res.runner.f()))
        log.info("level %s=%d done", key, getattr(c, key))
    diffs, hs = [], []
    for (ga, fa), (gb, fb) in zip(sols, sols[1:]):
        diffs.append(l1_diff(fa, ga, fb, gb))
        hs.append(ga.dx[0] if key == "nx" else ga.dv[0])
    diffs, hs = np.array(diffs), np.array(hs)
    slope = observed_order(diffs, hs)
    if write:
        out = Path(output if output is not None else cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "convergence.csv", "w") as fh:
            fh.write(f"{key}_coarse,h,l1_diff\n")
            for n, h, e in zip(sizes, hs, diffs):
                fh.write(f"{n},{h:.17g},{e:.17g}\n")
        (out / "slopes.txt").write_text(f"{cfg.sweep_axis} {slope:.6f}\n")
        (out / "convergence.gp").write_text(
            "set datafile separator ','\nset logscale xy\nset terminal pngcairo size 800,600\n"
            "set output 'convergence.png'\nset xlabel 'h'\nset ylabel 'L1 difference'\n"
            "plot 'convergence.csv' using 2:3 with linespoints title 'successive difference', "
            "'convergence.csv' using 2:($3*0+1e-300) notitle with dots\n"
        )
    return ConvergenceResult(sizes, hs, diffs, slope)


def time_steps(runner, dt: float, steps: int) -> float:
    """Median wall time (ms) of ``steps`` consecutive steps."""
    times = []
    for _ in range(steps):
        t0 = time.perf_counter()
        runner.step(dt)
        times.append(1e3 * (time.perf_counter() - t0))
    return float(np.median(times))


def run_bench(cfg: ExperimentConfig, output: str | Path | None = None, write: bool = True) -> list[dict]:
    """Median per-step times over ``cfg.bench_sizes`` (points per axis) and ranks."""
    rows = []
    for n in cfg.bench_sizes:
        c = replace(cfg, nx=n, nv=n, r=None)
        grid = make_grid(c)
        data = initial_data(c, grid)
        dt = time_step(c, grid)
        for r in cfg.bench_ranks:
            runner = LowRankRun(replace(c, r=r), grid, data)
            rows.append({"n": n, "solver": "lowrank", "r": r, "median_ms": time_steps(runner, dt, cfg.bench_steps)})
        if cfg.bench_fulltensor:
            runner = FullTensorRun(c, grid, data)
            rows.append({"n": n, "solver": "fulltensor", "r": 0, "median_ms": time_steps(runner, dt, cfg.bench_steps)})
        log.info("bench n=%d done", n)
    base = min(row["median_ms"] for row in rows if row["n"] == min(cfg.bench_sizes) and row["solver"] == "lowrank") if cfg.bench_ranks else rows[0]["median_ms"]
    prev = {}
    for row in rows:
        row["normalized"] = row["median_ms"] / base
        k = (row["solver"], row["r"])
        if k in prev:
            n0, t0 = prev[k]
            row["exponent"] = float(np.log(row["median_ms"] / t0) / np.log(row["n"] / n0))
        else:
            row["exponent"] = float("nan")
        prev[k] = (row["n"], row["median_ms"])
    if write:
        out = Path(output if output is not None else cfg.output)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "timings.csv", "w") as fh:
            fh.write("n,solver,r,median_ms,normalized,exponent\n")
            for row in rows:
                fh.write(f"{row['n']},{row['solver']},{row['r']},{row['median_ms']:.6g},{row['normalized']:.6g},{row['exponent']:.4g}\n")
        (out / "timings.gp").write_text(
            "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\n"
            "set terminal pngcairo size 800,600\nset output 'timings.png'\n"
            "set xlabel 'N'\nset ylabel 'normalized step time'\n"
            "plot 'timings.csv' using 1:5 with points pt 7\n"
        )
    return rows
