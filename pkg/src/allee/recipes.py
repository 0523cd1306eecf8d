"""Named experiments that turn a config into CSV/JSON artifacts.

Every recipe is a function ``(cfg, out_dir) -> list[Path]``.  Data files
hold no timing information, so a rerun with the same config and seed writes
byte-identical files; wall time goes to ``manifest.json`` only.
"""
from __future__ import annotations

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np

from .config import RECIPES, ExperimentConfig, emit_config
from .errors import ConfigError, NoBracketError
from .fpe import solve_nonlocal_fpe, stationary_extrema, steady_state_curve
from .io import write_csv, write_json
from .model import BranchTable, bifurcation_scan, critical_attack_rate, drift, equilibria, potential
from .mppp import most_probable_orbit
from .om import action, default_boundaries, el_residual, shoot_transition_path
from .sde import deterministic_path, ensemble_stats, simulate_path

__all__ = ["RECIPES", "run_experiment", "recipe_descriptions"]

# offset between the seed of a single displayed path and its ensemble
ENSEMBLE_SEED_OFFSET = 1000


def _tag(v: float) -> str:
    return f"{v:g}"


def _params_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg.model)
    d["lambda"] = d.pop("lam")
    return d


def _gamma_c(p, hold_product):
    try:
        return critical_attack_rate(p, hold_product=hold_product)
    except NoBracketError:
        return None


def _potential(cfg: ExperimentConfig, out: Path) -> list[Path]:
    p = cfg.model
    x = np.linspace(cfg.grid.x_min, cfg.grid.x_max, cfg.grid.n_cells + 1)
    files = [write_csv(out / "potential.csv", ("x", "U", "F"), zip(x.tolist(), potential(x, p).tolist(), drift(x, p).tolist()))]
    eq = equilibria(p)
    info = {
        "params": _params_dict(cfg),
        "beta": eq.beta,
        "carrying_capacity": eq.carrying_capacity,
        "regime": eq.regime,
        "x1": eq.x1, "x2": eq.x2, "x3": eq.x3, "x4": eq.x4,
        "stability": dict(eq.stability),
        "U_x1": potential(0.0, p),
        "U_x3": None if eq.x3 is None else potential(eq.x3, p),
        "critical_attack_rate": _gamma_c(p, cfg.solver.hold_product),
        "hold_product": cfg.solver.hold_product,
    }
    files.append(write_json(out / "equilibria.json", info))
    return files


def _write_branches(path: Path, table: BranchTable) -> Path:
    return write_csv(path, BranchTable.HEADER, table.as_records())


def _phaselines(cfg: ExperimentConfig, out: Path) -> list[Path]:
    s = cfg.solver
    rng = (s.gamma3_min, s.gamma3_max)
    table = bifurcation_scan(cfg.model, rng, s.gamma3_steps, s.hold_product)
    info = {
        "gamma3_range": list(rng),
        "steps": s.gamma3_steps,
        "hold_product": s.hold_product,
        "fold_gamma3": table.fold_gamma3,
        "fold_x": table.fold_x,
        "critical_attack_rate": _gamma_c(cfg.model, s.hold_product),
    }
    return [_write_branches(out / "branches.csv", table), write_json(out / "phaselines.json", info)]


def _paths(cfg: ExperimentConfig, out: Path) -> list[Path]:
    p, s, seed = cfg.model, cfg.solver, cfg.run.seed
    jc = cfg.jump_config() if p.epsilon > 0 else None
    files = []
    for i, x0 in enumerate(s.x0_list):
        tag = _tag(x0)
        traj = simulate_path(p, jc, x0, s.T, s.dt, seed + i)
        files.append(write_csv(out / f"path_x0_{tag}.csv", ("t", "x", "jump_flag"), traj.rows()))
        stats = ensemble_stats(p, jc, x0, s.T, s.dt, s.n_paths, seed + ENSEMBLE_SEED_OFFSET + i)
        rec = stats.to_json()
        rec.update(x0=x0, T=s.T, dt=s.dt)
        files.append(write_json(out / f"ensemble_x0_{tag}.json", rec))
        if p.lam == 0 and p.epsilon == 0:
            ref = deterministic_path(p, x0, traj.times)
            files.append(write_csv(out / f"ode_x0_{tag}.csv", ("t", "x"), zip(traj.times.tolist(), ref.tolist())))
    return files


def _transition(cfg: ExperimentConfig, out: Path) -> list[Path]:
    s = cfg.solver
    files = []
    for lam in s.lambda_list:
        if lam <= 0:
            raise ConfigError("transition recipe needs every lambda_list entry > 0")
        p = replace(cfg.model, lam=lam, epsilon=0.0)
        zl, zr = default_boundaries(p, s.left_x)
        path = shoot_transition_path(p, zl, zr, s.T, s.n_steps, s.tol, s.max_iter)
        straight = replace(path, z=np.linspace(zl, zr, len(path.times)), z_dot=np.full(len(path.times), (zr - zl) / s.T))
        tag = _tag(lam)
        files.append(write_csv(out / f"transition_lambda_{tag}.csv", ("t", "z", "x", "z_dot"), path.rows()))
        report = dict(path.report)
        report.update(
            **{"lambda": lam},
            z_left=zl, z_right=zr, T=s.T, n_steps=s.n_steps,
            action=path.action,
            straight_line_action=action(straight, p),
            boundary_mismatch=abs(float(path.z[-1]) - zr),
            el_residual_sup=float(np.max(np.abs(el_residual(path, p)))),
        )
        files.append(write_json(out / f"transition_lambda_{tag}.json", report))
    return files


def _steady_curve(cfg: ExperimentConfig, out: Path) -> list[Path]:
    s = cfg.solver
    rng = (s.gamma3_min, s.gamma3_max)
    files, summary = [], []
    for lam in s.lambda_list:
        table = steady_state_curve(cfg.model, lam, rng, s.gamma3_steps, s.hold_product)
        tag = _tag(lam)
        files.append(_write_branches(out / f"steady_lambda_{tag}.csv", table))
        summary.append({
            "lambda": lam,
            "fold_gamma3": table.fold_gamma3,
            "fold_x": table.fold_x,
            "extrema_at_gamma3": [{"x": x, "kind": kind} for x, kind in stationary_extrema(cfg.model, lam)],
        })
    files.append(write_json(out / "steady_curve.json", {"gamma3": cfg.model.gamma3, "curves": summary}))
    return files


def _solve(cfg: ExperimentConfig, x0: float):
    jc = cfg.jump_config() if cfg.model.epsilon > 0 else None
    s = cfg.solver
    return solve_nonlocal_fpe(cfg.model, jc, cfg.grid, x0, s.T, s.dt_pde, s.output_every, cfg.jumps.n_quad)


def _fields(cfg: ExperimentConfig):
    xs = cfg.solver.x0_list
    if cfg.solver.workers > 1:
        with ThreadPoolExecutor(cfg.solver.workers) as ex:
            return list(ex.map(lambda x0: _solve(cfg, x0), xs))
    return [_solve(cfg, x0) for x0 in xs]


def _write_density(out: Path, name: str, field, cfg: ExperimentConfig) -> list[Path]:
    meta = {
        "x0": field.x0,
        "params": _params_dict(cfg),
        "grid": asdict(cfg.grid),
        "n_times": len(field.times),
        "mass": field.mass.tolist(),
        **field.meta,
    }
    return [
        write_csv(out / f"{name}.csv", ("t", "x", "p"), field.long_rows()),
        write_json(out / f"{name}.json", meta),
    ]


def _fpe(cfg: ExperimentConfig, out: Path) -> list[Path]:
    files = []
    for f in _fields(cfg):
        files += _write_density(out, f"density_x0_{_tag(f.x0)}", f, cfg)
    return files


def _mppp(cfg: ExperimentConfig, out: Path) -> list[Path]:
    files = []
    for f in _fields(cfg):
        tag = _tag(f.x0)
        res = most_probable_orbit(f, cfg.solver.prominence)
        files += _write_density(out, f"density_x0_{tag}", f, cfg)
        files.append(write_csv(out / f"mppp_x0_{tag}.csv", ("t", "x_m", "mode_count"), res.rows()))
        files.append(write_json(out / f"mppp_x0_{tag}_events.json", res.events()))
    return files


_RECIPES = {
    "potential": (_potential, "potential U(x), drift and equilibria"),
    "phaselines": (_phaselines, "equilibrium branches over an attack-rate sweep"),
    "paths": (_paths, "sample paths and extinction ensembles"),
    "transition": (_transition, "most probable transition paths by shooting"),
    "steady_curve": (_steady_curve, "stationary-density extrema over an attack-rate sweep"),
    "fpe": (_fpe, "density evolution under the jump-diffusion"),
    "mppp": (_mppp, "most probable orbits and mode-count changes"),
}
assert tuple(_RECIPES) == RECIPES


def recipe_descriptions() -> dict[str, str]:
    return {k: v[1] for k, v in _RECIPES.items()}


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> dict:
    """Run the configured recipe and write its artifacts plus ``manifest.json``.

    ``out_dir`` overrides ``cfg.run.out``.  Returns the manifest.
    """
    name = cfg.run.experiment
    if name not in _RECIPES:
        raise ConfigError(f"unknown recipe {name!r}; known: {', '.join(RECIPES)}")
    out = Path(out_dir if out_dir is not None else cfg.run.out)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    files = _RECIPES[name][0](cfg, out)
    wall = time.perf_counter() - t0
    manifest = {
        "experiment": name,
        "seed": cfg.run.seed,
        "files": [{"name": f.name, "bytes": f.stat().st_size, "sha256": _digest(f)} for f in files],
        "config": emit_config(cfg),
        "wall_time_s": round(wall, 3) if math.isfinite(wall) else None,
    }
    write_json(out / "manifest.json", manifest)
    return manifest
