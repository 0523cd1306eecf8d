"""Single-species population model with an Allee effect under Gaussian and
alpha-stable Levy noise: deterministic analysis, simulation, density
evolution and most probable dynamics."""
from .config import ExperimentConfig, emit_config, load_config, parse_config
from .errors import (
    AlleeError,
    ConfigError,
    ConvergenceError,
    InstabilityError,
    NoBracketError,
    NumericalError,
    StepSizeError,
)
from .fpe import DensityField, Grid1D, solve_local_fpe, solve_nonlocal_fpe, stationary_extrema, steady_state_curve
from .levy import JumpConfig, levy_density, sample_jumps, sample_stable, total_intensity, compensator_drift
from .model import (
    Equilibria,
    ModelParams,
    bifurcation_parameter,
    bifurcation_scan,
    critical_attack_rate,
    drift,
    equilibria,
    potential,
)
from .mppp import MpppResult, count_modes, most_probable_orbit, orbit_family
from .om import TransitionPath, om_gaussian, om_jump, shoot_transition_path
from .recipes import RECIPES, run_experiment
from .sde import EnsembleStats, Trajectory, ensemble_stats, simulate_path

__version__ = "0.1.0"

__all__ = [
    "AlleeError",
    "bifurcation_parameter",
    "bifurcation_scan",
    "compensator_drift",
    "ConfigError",
    "ConvergenceError",
    "count_modes",
    "critical_attack_rate",
    "DensityField",
    "drift",
    "emit_config",
    "ensemble_stats",
    "EnsembleStats",
    "Equilibria",
    "equilibria",
    "ExperimentConfig",
    "Grid1D",
    "InstabilityError",
    "JumpConfig",
    "levy_density",
    "load_config",
    "ModelParams",
    "most_probable_orbit",
    "MpppResult",
    "NoBracketError",
    "NumericalError",
    "om_gaussian",
    "om_jump",
    "orbit_family",
    "parse_config",
    "potential",
    "RECIPES",
    "run_experiment",
    "sample_jumps",
    "sample_stable",
    "shoot_transition_path",
    "simulate_path",
    "solve_local_fpe",
    "solve_nonlocal_fpe",
    "stationary_extrema",
    "steady_state_curve",
    "StepSizeError",
    "total_intensity",
    "Trajectory",
    "TransitionPath",
]
