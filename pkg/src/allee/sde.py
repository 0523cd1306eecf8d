"""Euler-Maruyama simulation of the jump-diffusion population model.

One step of size ``dt`` is

    dX = F(X) dt + lam * X * dB + X * sum(eps * y_j) - X * m * dt

where the ``y_j`` are the jumps arriving in the step (compound Poisson with
rate ``nu(Y)``) and ``m`` is the compensator of the jump set.  States that
would go negative are clamped to zero and stay there.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import StepSizeError
from .levy import JumpConfig, compensator_drift, sample_jump_sizes, total_intensity
from .model import ModelParams, drift, per_capita_growth

__all__ = [
    "EXTINCTION_THRESHOLD",
    "Trajectory",
    "EnsembleStats",
    "simulate_path",
    "simulate_lamperti",
    "lamperti_drift",
    "lamperti_terminal",
    "ensemble_terminal",
    "ensemble_stats",
    "deterministic_path",
]

EXTINCTION_THRESHOLD = 1e-4
MAX_JUMPS_PER_STEP = 10.0


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    jump_marks: np.ndarray
    params: ModelParams
    jumps: JumpConfig | None
    seed: int | None
    absorbed: bool = False

    def __len__(self):
        return len(self.times)

    def rows(self):
        """``(t, x, jump_flag)`` rows for CSV export."""
        flags = np.zeros(len(self.times), dtype=int)
        flags[self.jump_marks] = 1
        return zip(self.times.tolist(), self.states.tolist(), flags.tolist())


def _n_steps(T: float, dt: float) -> int:
    if dt <= 0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    return int(round(T / dt))


def _check_jump_rate(cfg: JumpConfig | None, dt: float) -> float:
    if cfg is None or cfg.epsilon == 0:
        return 0.0
    rate = total_intensity(cfg)
    if rate * dt > MAX_JUMPS_PER_STEP:
        raise StepSizeError(f"dt * nu(Y) = {rate * dt:.3g} exceeds {MAX_JUMPS_PER_STEP}; reduce dt")
    return rate


def _em_step(x, p, cfg, rate, comp, dt, rng):
    """Advance all states in ``x`` by one step; returns (new_x, jumped mask)."""
    n = x.shape[0]
    incr = drift(x, p) * dt
    if p.lam > 0:
        incr = incr + p.lam * x * rng.normal(0.0, np.sqrt(dt), n)
    jumped = None
    if rate > 0:
        counts = rng.poisson(rate * dt, n)
        total = int(counts.sum())
        if total:
            mult = cfg.epsilon * sample_jump_sizes(cfg, total, rng)
            summed = np.bincount(np.repeat(np.arange(n), counts), weights=mult, minlength=n)
            incr = incr + x * summed
        jumped = counts > 0
        if comp:
            incr = incr - x * comp * dt
    x = x + incr
    np.maximum(x, 0.0, out=x)
    return x, jumped


def _resolve(p: ModelParams, cfg: JumpConfig | None) -> JumpConfig | None:
    if cfg is None:
        return None if p.epsilon == 0 else JumpConfig.from_params(p)
    if cfg.epsilon != p.epsilon or cfg.alpha != p.alpha:
        raise ValueError("JumpConfig alpha/epsilon disagree with ModelParams")
    return cfg


def simulate_path(
    p: ModelParams,
    cfg: JumpConfig | None,
    x0: float,
    T: float,
    dt: float = 1e-3,
    seed: int | None = None,
) -> Trajectory:
    """Single sample path on ``[0, T]``."""
    if x0 <= 0:
        raise ValueError("x0 must be > 0")
    cfg = _resolve(p, cfg)
    n = _n_steps(T, dt)
    rate = _check_jump_rate(cfg, dt)
    comp = compensator_drift(cfg) if cfg is not None else 0.0
    rng = np.random.default_rng(seed)
    states = np.empty(n + 1)
    states[0] = x0
    marks = []
    x = np.array([float(x0)])
    for k in range(n):
        x, jumped = _em_step(x, p, cfg, rate, comp, dt, rng)
        states[k + 1] = x[0]
        if jumped is not None and jumped[0]:
            marks.append(k + 1)
    times = np.arange(n + 1) * dt
    return Trajectory(times, states, np.array(marks, dtype=int), p, cfg, seed, bool(states[-1] == 0.0))


def ensemble_terminal(
    p: ModelParams,
    cfg: JumpConfig | None,
    x0,
    T: float,
    dt: float,
    n_paths: int,
    seed: int | None = None,
    record_mean: bool = False,
):
    """Terminal states of ``n_paths`` independent paths (vectorised, one seeded stream).

    ``x0`` may be a scalar or an array of per-path starting values.  With
    ``record_mean`` also returns the ensemble mean at every step and the
    number of steps in which each path jumped.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    cfg = _resolve(p, cfg)
    n = _n_steps(T, dt)
    rate = _check_jump_rate(cfg, dt)
    comp = compensator_drift(cfg) if cfg is not None else 0.0
    rng = np.random.default_rng(seed)
    x = np.broadcast_to(np.asarray(x0, dtype=float), (n_paths,)).copy()
    if np.any(x <= 0):
        raise ValueError("x0 must be > 0")
    mean = np.empty(n + 1) if record_mean else None
    jump_steps = np.zeros(n_paths, dtype=int)
    if record_mean:
        mean[0] = x.mean()
    for k in range(n):
        x, jumped = _em_step(x, p, cfg, rate, comp, dt, rng)
        if record_mean:
            mean[k + 1] = x.mean()
            if jumped is not None:
                jump_steps += jumped
    if record_mean:
        return x, mean, jump_steps
    return x


@dataclass(frozen=True)
class EnsembleStats:
    extinction_fraction: float
    n_paths: int
    seed: int | None
    edges: np.ndarray
    counts: np.ndarray
    mean_times: np.ndarray
    mean_path: np.ndarray
    terminal: np.ndarray = field(repr=False)
    jump_steps: np.ndarray = field(repr=False)

    def density(self) -> np.ndarray:
        """Histogram normalised by the number of paths (mass outside the edges is lost)."""
        return self.counts / (self.n_paths * np.diff(self.edges))

    def to_json(self) -> dict:
        return {
            "extinction_fraction": self.extinction_fraction,
            "n_paths": self.n_paths,
            "seed": self.seed,
            "histogram": {"edges": self.edges.tolist(), "counts": self.counts.tolist()},
        }


def ensemble_stats(
    p: ModelParams,
    cfg: JumpConfig | None,
    x0,
    T: float,
    dt: float,
    n_paths: int,
    seed: int | None = None,
    edges=None,
) -> EnsembleStats:
    """Extinction fraction, terminal histogram and mean path of an ensemble.

    A path counts as extinct when its terminal state is below
    ``EXTINCTION_THRESHOLD`` (absorbed paths sit at exactly zero).
    """
    if edges is None:
        edges = np.linspace(0.0, 15.0, 61)
    edges = np.asarray(edges, dtype=float)
    xT, mean, jump_steps = ensemble_terminal(p, cfg, x0, T, dt, n_paths, seed, record_mean=True)
    counts, _ = np.histogram(xT, bins=edges)
    return EnsembleStats(
        extinction_fraction=float(np.mean(xT < EXTINCTION_THRESHOLD)),
        n_paths=n_paths,
        seed=seed,
        edges=edges,
        counts=counts,
        mean_times=np.arange(len(mean)) * dt,
        mean_path=mean,
        terminal=xT,
        jump_steps=jump_steps,
    )


def lamperti_drift(y, p: ModelParams):
    """G(y) = h(exp(y)) - lam**2/2, the drift of Y = ln X."""
    return per_capita_growth(np.exp(y), p) - p.lam**2 / 2


def _lamperti_check(p: ModelParams):
    if p.epsilon != 0:
        raise ValueError("the log transform is only additive for Gaussian noise; epsilon must be 0")


def simulate_lamperti(p: ModelParams, y0: float, T: float, dt: float = 1e-3, seed: int | None = None) -> Trajectory:
    """Euler-Maruyama path of ``dY = G(Y) dt + lam dB`` (states are in log coordinates)."""
    _lamperti_check(p)
    n = _n_steps(T, dt)
    rng = np.random.default_rng(seed)
    noise = p.lam * rng.normal(0.0, np.sqrt(dt), n) if p.lam > 0 else np.zeros(n)
    ys = np.empty(n + 1)
    ys[0] = y0
    y = float(y0)
    for k in range(n):
        y = y + float(lamperti_drift(y, p)) * dt + noise[k]
        ys[k + 1] = y
    return Trajectory(np.arange(n + 1) * dt, ys, np.array([], dtype=int), p, None, seed)


def lamperti_terminal(p: ModelParams, y0, T: float, dt: float, n_paths: int, seed: int | None = None) -> np.ndarray:
    """Terminal log-states of ``n_paths`` Lamperti paths."""
    _lamperti_check(p)
    n = _n_steps(T, dt)
    rng = np.random.default_rng(seed)
    y = np.broadcast_to(np.asarray(y0, dtype=float), (n_paths,)).copy()
    sq = np.sqrt(dt)
    for _ in range(n):
        y += lamperti_drift(y, p) * dt
        if p.lam > 0:
            y += p.lam * rng.normal(0.0, sq, n_paths)
    return y


def deterministic_path(p: ModelParams, x0: float, times) -> np.ndarray:
    """Reference solution of dx/dt = F(x) with an 8th-order Runge-Kutta integrator."""
    times = np.asarray(times, dtype=float)
    sol = solve_ivp(
        lambda t, x: drift(x, p), (times[0], times[-1]), [x0],
        method="DOP853", t_eval=times, rtol=1e-12, atol=1e-14,
    )
    return sol.y[0]
