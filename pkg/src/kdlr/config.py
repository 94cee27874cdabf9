"""Experiment configuration: ``key = value`` text, optionally in sections.

Section names only group keys for readability; every key is global and may
appear once.  Unknown keys are rejected.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, fields

from .initial import PROBLEMS
from .mesh import ConfigurationError

SOLVERS = ("lowrank", "fulltensor", "fluid")
ICS = tuple(PROBLEMS) + ("custom",)


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass
class ExperimentConfig:
    solver: str
    ic: str
    epsilon: float
    t_final: float
    nx: int
    nv: int
    d: int | None = None
    r: int | None = None
    dt: float | None = None
    cfl: float = 0.25
    v_min: float | None = None
    v_max: float | None = None
    gmres_tol: float = 1e-10
    gmres_restart: int = 30
    gmres_max_iter: int = 400
    preconditioner: str = "exact"
    output: str = "output"
    snapshot_every: int = 0
    record_timing: bool = True
    custom_f0: str | None = None
    custom_eta: str | None = None
    sweep_axis: str = "x"
    sweep_sizes: tuple[int, ...] = ()
    bench_sizes: tuple[int, ...] = (24, 48)
    bench_ranks: tuple[int, ...] = (5, 10)
    bench_steps: int = 20
    bench_fulltensor: bool = True

    def echo(self) -> str:
        """Render back to config text that parses to an equal object."""
        lines = []
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None:
                continue
            if isinstance(val, tuple):
                val = ", ".join(str(v) for v in val)
            elif isinstance(val, bool):
                val = "true" if val else "false"
            elif isinstance(val, float):
                val = repr(val)
            lines.append(f"{f.name} = {val}")
        return "\n".join(lines) + "\n"

    @property
    def velocity_bounds(self) -> tuple[float, float]:
        return self.v_min, self.v_max


_REQUIRED = ("solver", "ic", "epsilon", "t_final", "nx", "nv")

_PARSERS = {
    "solver": str,
    "ic": str,
    "epsilon": float,
    "t_final": float,
    "nx": int,
    "nv": int,
    "d": int,
    "r": int,
    "dt": float,
    "cfl": float,
    "v_min": float,
    "v_max": float,
    "gmres_tol": float,
    "gmres_restart": int,
    "gmres_max_iter": int,
    "preconditioner": str,
    "output": str,
    "snapshot_every": int,
    "record_timing": _bool,
    "custom_f0": str,
    "custom_eta": str,
    "sweep_axis": str,
    "sweep_sizes": _int_list,
    "bench_sizes": _int_list,
    "bench_ranks": _int_list,
    "bench_steps": int,
    "bench_fulltensor": _bool,
}


def _raw_pairs(text: str) -> list[tuple[str, str]]:
    cp = configparser.ConfigParser(
        interpolation=None,
        strict=True,
        inline_comment_prefixes=("#", ";"),
        default_section="__defaults__",
    )
    cp.optionxform = str
    body = text if text.lstrip().startswith("[") else "[experiment]\n" + text
    try:
        cp.read_string(body)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from None
    pairs = []
    for sec in cp.sections():
        for key, value in cp.items(sec):
            pairs.append((key.strip(), value.strip()))
    return pairs


def parse_config(text: str) -> ExperimentConfig:
    seen: dict[str, object] = {}
    for key, raw in _raw_pairs(text):
        if key not in _PARSERS:
            raise ConfigurationError(f"unknown key {key!r}")
        if key in seen:
            raise ConfigurationError(f"key {key!r} given more than once")
        try:
            seen[key] = _PARSERS[key](raw)
        except ValueError:
            raise ConfigurationError(f"key {key!r}: cannot parse {raw!r} as {_PARSERS[key].__name__}") from None
    for key in _REQUIRED:
        if key not in seen:
            raise ConfigurationError(f"missing required key {key!r}")
    cfg = ExperimentConfig(**seen)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check compatibility and fill problem-dependent defaults in place."""
    if cfg.solver not in SOLVERS:
        raise ConfigurationError(f"key 'solver': expected one of {SOLVERS}, got {cfg.solver!r}")
    if cfg.ic not in ICS:
        raise ConfigurationError(f"key 'ic': expected one of {ICS}, got {cfg.ic!r}")
    if cfg.ic != "custom":
        native_d = PROBLEMS[cfg.ic][1]
        if cfg.d is None:
            cfg.d = native_d
        elif cfg.d != native_d:
            raise ConfigurationError(f"key 'd': initial condition {cfg.ic!r} requires d={native_d}")
    else:
        if cfg.custom_f0 is None:
            raise ConfigurationError("key 'custom_f0' is required for ic = custom")
        if cfg.d is None:
            raise ConfigurationError("key 'd' is required for ic = custom")
    if cfg.d not in (1, 2):
        raise ConfigurationError("key 'd': must be 1 or 2")
    if cfg.solver == "lowrank":
        if cfg.r is None:
            raise ConfigurationError("key 'r' is required for solver = lowrank")
        if cfg.r < 1:
            raise ConfigurationError("key 'r' must be positive")
    elif cfg.r is not None:
        raise ConfigurationError(f"key 'r' is only valid for solver = lowrank, not {cfg.solver!r}")
    if cfg.epsilon <= 0.0:
        raise ConfigurationError("key 'epsilon' must be positive")
    if cfg.t_final <= 0.0:
        raise ConfigurationError("key 't_final' must be positive")
    if cfg.dt is not None and cfg.dt <= 0.0:
        raise ConfigurationError("key 'dt' must be positive")
    if not 0.0 < cfg.cfl <= 1.0:
        raise ConfigurationError("key 'cfl' must lie in (0, 1]")
    if cfg.gmres_tol <= 0.0:
        raise ConfigurationError("key 'gmres_tol' must be positive")
    if cfg.preconditioner not in ("exact", "factored", "none"):
        raise ConfigurationError("key 'preconditioner': expected exact, factored or none")
    if cfg.sweep_axis not in ("x", "v"):
        raise ConfigurationError("key 'sweep_axis': expected x or v")
    if cfg.bench_steps < 1:
        raise ConfigurationError("key 'bench_steps' must be positive")
    default_v = 5.0 if cfg.ic == "potential_hill_2d" else 10.0
    if cfg.v_min is None:
        cfg.v_min = -default_v
    if cfg.v_max is None:
        cfg.v_max = default_v
    if not cfg.v_max > cfg.v_min:
        raise ConfigurationError("keys 'v_min'/'v_max' must be ordered")
    return cfg
