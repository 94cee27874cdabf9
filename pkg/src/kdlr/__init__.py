"""Dynamical low-rank solver for the high-field kinetic equation with
Fokker-Planck collisions, plus full phase-space and fluid reference solvers.
"""

from .mesh import ConfigurationError, Grid, build_grid, cfl_timestep
from .state import LowRankState, init_from_samples, reconstruct_f, reorthonormalize, singular_values
from .field import FieldState, ampere_step, gauss_residual, solve_poisson
from .moments import dense_moments, macroscopic_moments, maxwellian
from .splitting import StepOptions, StepReport, advance, make_field
from .reference import FluidState, FullTensorState, fluid_step, full_tensor_step
from .diagnostics import RunHistory, l1_diff, maxwellian_distance, observed_order
from .initial import PROBLEMS, InitialData, low_rank_initial, prepare
from .config import ExperimentConfig, parse_config
from .experiments import run_bench, run_convergence, run_experiment

__all__ = [
    "ConfigurationError", "Grid", "build_grid", "cfl_timestep",
    "LowRankState", "init_from_samples", "reconstruct_f", "reorthonormalize", "singular_values",
    "FieldState", "ampere_step", "gauss_residual", "solve_poisson",
    "dense_moments", "macroscopic_moments", "maxwellian",
    "StepOptions", "StepReport", "advance", "make_field",
    "FluidState", "FullTensorState", "fluid_step", "full_tensor_step",
    "RunHistory", "l1_diff", "maxwellian_distance", "observed_order",
    "PROBLEMS", "InitialData", "low_rank_initial", "prepare",
    "ExperimentConfig", "parse_config", "run_bench", "run_convergence", "run_experiment",
]
