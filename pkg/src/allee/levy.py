"""Symmetric alpha-stable noise: Levy measure, truncated jump sets, samplers.

Jumps act multiplicatively, ``x -> x * (1 + epsilon * y)``, with jump sizes
``y`` drawn from the alpha-stable Levy measure

    nu(dy) = c_alpha * |y|**(-1 - alpha) dy

restricted to ``delta <= |y| <= r_max`` (or ``delta <= y <= r_max`` for
one-sided support).  The restriction keeps the arrival rate finite so the
jump part is a compound Poisson process.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gamma as gamma_fn

__all__ = [
    "JumpConfig",
    "stable_constant",
    "levy_density",
    "total_intensity",
    "truncated_levy_integral",
    "sample_stable",
    "sample_jump_sizes",
    "sample_jumps",
    "compensator_drift",
    "jump_quadrature",
]

POSITIVITY_MARGIN = 1e-3


def stable_constant(alpha: float) -> float:
    """c_alpha = alpha * Gamma((1+alpha)/2) / (2**(1-alpha) * sqrt(pi) * Gamma(1 - alpha/2))."""
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha!r}")
    return alpha * gamma_fn((1 + alpha) / 2) / (2 ** (1 - alpha) * math.sqrt(math.pi) * gamma_fn(1 - alpha / 2))


def levy_density(z, alpha: float):
    """Density of the symmetric alpha-stable Levy measure at ``z`` (z != 0)."""
    z = np.asarray(z, dtype=float)
    if np.any(z == 0):
        raise ValueError("Levy density is singular at z = 0")
    out = stable_constant(alpha) * np.abs(z) ** (-1 - alpha)
    return out if out.ndim else float(out)


def _default_r_max(epsilon: float) -> float:
    if epsilon <= 0:
        return 10.0
    return min(10.0, (1 - POSITIVITY_MARGIN) / epsilon)


@dataclass(frozen=True)
class JumpConfig:
    """Truncated jump set and intensity.

    ``r_max=None`` picks ``min(10, (1 - 1e-3)/epsilon)`` so every downward
    jump keeps ``1 + epsilon*y > 0``.
    """

    alpha: float = 1.5
    epsilon: float = 0.0
    delta: float = 0.1
    r_max: float | None = None
    symmetric: bool = True

    def __post_init__(self):
        if self.r_max is None:
            object.__setattr__(self, "r_max", _default_r_max(self.epsilon))
        if not 0 < self.alpha < 2:
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha!r}")
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        if not 0 < self.delta < self.r_max:
            raise ValueError(f"need 0 < delta < r_max, got delta={self.delta}, r_max={self.r_max}")
        if self.symmetric and self.epsilon * self.r_max >= 1:
            raise ValueError("two-sided jumps need epsilon * r_max < 1 so that 1 + epsilon*y > 0")

    @classmethod
    def from_params(cls, p, **kwargs) -> "JumpConfig":
        """Build from a :class:`~allee.model.ModelParams` (alpha, epsilon)."""
        return cls(alpha=p.alpha, epsilon=p.epsilon, **kwargs)

    @property
    def n_sides(self) -> int:
        return 2 if self.symmetric else 1


def truncated_levy_integral(power: float, cfg: JumpConfig) -> float:
    """Integral of ``y**power * nu(dy)`` over ``[delta, r_max]`` (one side)."""
    c = stable_constant(cfg.alpha)
    e = power - cfg.alpha  # exponent of the antiderivative
    if abs(e) < 1e-14:
        return c * math.log(cfg.r_max / cfg.delta)
    return c * (cfg.r_max**e - cfg.delta**e) / e


def total_intensity(cfg: JumpConfig) -> float:
    """nu(Y): arrival rate of jumps in the truncated set."""
    return cfg.n_sides * truncated_levy_integral(0.0, cfg)


def compensator_drift(cfg: JumpConfig) -> float:
    """Integral of ``epsilon * y`` against nu over the jump set.

    Vanishes for symmetric support.
    """
    if cfg.symmetric:
        return 0.0
    return cfg.epsilon * truncated_levy_integral(1.0, cfg)


def sample_stable(alpha: float, n: int, rng=None) -> np.ndarray:
    """Standard symmetric alpha-stable variates, characteristic function exp(-|xi|**alpha).

    Chambers-Mallows-Stuck transform of a uniform angle and a unit exponential.
    ``rng`` is a seed or a :class:`numpy.random.Generator`.
    """
    if not 0 < alpha <= 2:
        raise ValueError(f"alpha must lie in (0, 2], got {alpha!r}")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(rng)
    v = rng.uniform(-np.pi / 2, np.pi / 2, n)
    w = rng.standard_exponential(n)
    if alpha == 1:
        return np.tan(v)
    return np.sin(alpha * v) / np.cos(v) ** (1 / alpha) * (np.cos((1 - alpha) * v) / w) ** ((1 - alpha) / alpha)


def sample_jump_sizes(cfg: JumpConfig, n: int, rng) -> np.ndarray:
    """Jump sizes from the normalised truncated measure, by inverse CDF."""
    a = cfg.alpha
    lo, hi = cfg.delta**-a, cfg.r_max**-a
    u = rng.random(n)
    y = (lo - u * (lo - hi)) ** (-1 / a)
    if cfg.symmetric:
        y = np.where(rng.random(n) < 0.5, -y, y)
    return y


def sample_jumps(cfg: JumpConfig, dt: float, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """Jumps arriving in one window of length ``dt``.

    Returns ``(y, multiplier)`` with ``multiplier = epsilon * y``.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    rng = np.random.default_rng(rng)
    n = rng.poisson(total_intensity(cfg) * dt)
    y = sample_jump_sizes(cfg, n, rng)
    mult = cfg.epsilon * y
    assert np.all(1 + mult > 0), "jump violates 1 + epsilon*y > 0"
    return y, mult


def jump_quadrature(cfg: JumpConfig, n_nodes: int = 256) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for integrals against nu over the jump set.

    Composite trapezoid in ``u = log|y|`` on ``[log delta, log r_max]`` (a
    log-spaced mesh in ``y``), mirrored to negative ``y`` when symmetric.
    ``sum(w * f(y))`` approximates ``integral f(y) nu(dy)``.
    """
    u = np.linspace(math.log(cfg.delta), math.log(cfg.r_max), n_nodes)
    du = u[1] - u[0]
    tw = np.full(n_nodes, du)
    tw[[0, -1]] *= 0.5
    y = np.exp(u)
    # nu(dy) = c * y**(-1-alpha) dy = c * y**(-alpha) du
    w = tw * stable_constant(cfg.alpha) * y ** (-cfg.alpha)
    if cfg.symmetric:
        return np.concatenate([-y[::-1], y]), np.concatenate([w[::-1], w])
    return y, w
