"""Onsager-Machlup action and most probable transition paths.

With Gaussian noise only, ``Y = ln X`` obeys ``dY = G(Y) dt + lam dB``.
The Onsager-Machlup Lagrangian in these coordinates is

    OM(z, zdot) = ((G(z) - zdot) / lam)**2 + G'(z)

and its Euler-Lagrange equation is ``zddot = G(z) G'(z) + lam**2/2 G''(z)``.
Transition paths solve that second-order ODE with two-point boundary
conditions, found here by shooting on the initial velocity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError
from .levy import JumpConfig, compensator_drift
from .model import ModelParams, drift_derivative, growth_curvature, growth_slope, per_capita_growth

__all__ = [
    "TransitionPath",
    "lamperti_G",
    "lamperti_G_dot",
    "lamperti_G_ddot",
    "om_gaussian",
    "om_jump",
    "euler_lagrange_rhs",
    "integrate_el",
    "shoot_transition_path",
    "action",
    "el_residual",
    "default_boundaries",
]

LEFT_BOUNDARY_X = 1e-3
SHOOT_TOL = 1e-6
MAX_ITER = 200
_Z_ESCAPE = 60.0


def _require_noise(p: ModelParams):
    if p.lam <= 0:
        raise ValueError("Gaussian noise intensity lam must be > 0")


def lamperti_G(z, p: ModelParams):
    """Drift of the log-population, G(z) = h(e^z) - lam**2/2."""
    return per_capita_growth(np.exp(z), p) - 0.5 * p.lam**2


def lamperti_G_dot(z, p: ModelParams):
    """dG/dz = x h'(x) at x = e^z."""
    x = np.exp(z)
    return x * growth_slope(x, p)


def lamperti_G_ddot(z, p: ModelParams):
    """d2G/dz2 = x h'(x) + x**2 h''(x) at x = e^z."""
    x = np.exp(z)
    return x * growth_slope(x, p) + x * x * growth_curvature(x, p)


def om_gaussian(z, z_dot, p: ModelParams):
    """Onsager-Machlup function in log coordinates."""
    _require_noise(p)
    return ((lamperti_G(z, p) - z_dot) / p.lam) ** 2 + lamperti_G_dot(z, p)


def om_jump(z, z_dot, p: ModelParams, cfg: JumpConfig):
    """Onsager-Machlup function of the jump-diffusion in population coordinates.

    ``z`` is the population size here, not its logarithm.  The last term
    couples the drift residual to the mean jump ``integral eps*y nu(dy)``;
    it vanishes for symmetric jump support.
    """
    _require_noise(p)
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("om_jump needs z > 0")
    resid = z_dot - z * per_capita_growth(z, p)
    return (
        (resid / (p.lam * z)) ** 2
        + drift_derivative(z, p)
        + 2.0 * resid / (p.lam**2 * z) * compensator_drift(cfg)
    )


def euler_lagrange_rhs(z, p: ModelParams):
    """Acceleration of a stationary path of the Gaussian action."""
    _require_noise(p)
    return lamperti_G(z, p) * lamperti_G_dot(z, p) + 0.5 * p.lam**2 * lamperti_G_ddot(z, p)


@dataclass(frozen=True)
class TransitionPath:
    times: np.ndarray
    z: np.ndarray
    z_dot: np.ndarray
    z_left: float
    z_right: float
    action: float
    report: dict = field(default_factory=dict)

    @property
    def x(self) -> np.ndarray:
        return np.exp(self.z)

    def rows(self):
        """``(t, z, x, z_dot)`` rows for CSV export."""
        return zip(self.times.tolist(), self.z.tolist(), self.x.tolist(), self.z_dot.tolist())


def integrate_el(p: ModelParams, z0: float, v0: float, T: float, n_steps: int):
    """Classical RK4 on (z, z_dot).

    Integration stops early if ``|z|`` leaves a safe range; the remaining
    entries are filled with +-inf so the terminal value keeps its sign.
    """
    h = T / n_steps
    z = np.empty(n_steps + 1)
    v = np.empty(n_steps + 1)
    z[0], v[0] = z0, v0
    f = lambda q: float(euler_lagrange_rhs(q, p))
    zc, vc = z0, v0
    with np.errstate(over="ignore", invalid="ignore"):
        _rk4_loop(f, z, v, zc, vc, h, n_steps)
    return z, v


def _rk4_loop(f, z, v, zc, vc, h, n_steps):
    for i in range(n_steps):
        a1 = f(zc)
        a2 = f(zc + 0.5 * h * vc)
        a3 = f(zc + 0.5 * h * (vc + 0.5 * h * a1))
        a4 = f(zc + h * (vc + 0.5 * h * a2))
        zn = zc + h * vc + h * h / 6.0 * (a1 + a2 + a3)
        vn = vc + h / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        if not (abs(zn) < _Z_ESCAPE and math.isfinite(vn)):
            # direction of escape from the last finite state
            sign = math.copysign(math.inf, zn - zc if math.isfinite(zn) else vc)
            z[i + 1:] = sign
            v[i + 1:] = sign
            break
        zc, vc = zn, vn
        z[i + 1], v[i + 1] = zc, vc


def _mismatch(p, z_left, z_right, v0, T, n_steps):
    z, v = integrate_el(p, z_left, v0, T, n_steps)
    return z[-1] - z_right, z, v


def shoot_transition_path(
    p: ModelParams,
    z_left: float,
    z_right: float,
    T: float = 10.0,
    n_steps: int = 2000,
    tol: float = SHOOT_TOL,
    max_iter: int = MAX_ITER,
) -> TransitionPath:
    """Most probable path from ``z_left`` to ``z_right`` (log coordinates) in time ``T``.

    The initial velocity is bracketed by geometric expansion around the
    straight-line slope and then bisected until the terminal mismatch is
    below ``tol``.
    """
    _require_noise(p)
    if n_steps < 2:
        raise ValueError("n_steps must be >= 2")
    guess = (z_right - z_left) / T
    m0, z, v = _mismatch(p, z_left, z_right, guess, T, n_steps)
    iters = 1
    if abs(m0) <= tol:
        return _finish(p, z_left, z_right, T, z, v, guess, m0, iters, (guess, guess))

    step = max(abs(guess), 1.0) * 0.1
    lo = hi = guess
    m_lo = m_hi = m0
    while np.sign(m_lo) == np.sign(m_hi):
        if iters >= max_iter:
            raise ConvergenceError(f"no bracket for the initial velocity around {guess:g} after {iters} trials")
        if m0 > 0:
            lo = guess - step
            m_lo = _mismatch(p, z_left, z_right, lo, T, n_steps)[0]
        else:
            hi = guess + step
            m_hi = _mismatch(p, z_left, z_right, hi, T, n_steps)[0]
        step *= 2.0
        iters += 1
    if m_lo > m_hi:
        raise ConvergenceError("terminal state is not increasing in the initial velocity on the bracket")

    bracket = (lo, hi)
    while iters < max_iter:
        mid = 0.5 * (lo + hi)
        m, z, v = _mismatch(p, z_left, z_right, mid, T, n_steps)
        iters += 1
        if abs(m) <= tol:
            return _finish(p, z_left, z_right, T, z, v, mid, m, iters, bracket)
        if m < 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.finfo(float).eps * max(1.0, abs(mid)):
            break
    raise ConvergenceError(
        f"shooting did not reach tol={tol:g} within {iters} iterations; bracket [{lo!r}, {hi!r}], mismatch {m:g}"
    )


def _finish(p, z_left, z_right, T, z, v, v0, mismatch, iters, bracket):
    times = np.linspace(0.0, T, len(z))
    path = TransitionPath(times, z, v, z_left, z_right, math.nan)
    report = {"initial_velocity": v0, "mismatch": float(mismatch), "iterations": iters, "bracket": list(bracket)}
    return TransitionPath(times, z, v, z_left, z_right, action(path, p), report)


def action(path: TransitionPath, p: ModelParams) -> float:
    """Trapezoidal quadrature of the Gaussian OM function along the path."""
    if len(path.times) < 2:
        raise ValueError("path needs at least two nodes")
    return float(np.trapezoid(om_gaussian(path.z, path.z_dot, p), path.times))


def el_residual(path: TransitionPath, p: ModelParams) -> np.ndarray:
    """Euler-Lagrange residual at interior nodes.

    ``zddot`` comes from the fourth-order five-point central stencil; the
    three-point stencil's own truncation error (h**2/12 times the fourth
    derivative) would swamp the residual at moderate resolution.
    """
    h = path.times[1] - path.times[0]
    z = path.z
    if len(z) < 5:
        raise ValueError("path needs at least five nodes")
    zdd = (-z[4:] + 16 * z[3:-1] - 30 * z[2:-2] + 16 * z[1:-3] - z[:-4]) / (12 * h**2)
    return zdd - euler_lagrange_rhs(z[2:-2], p)


def default_boundaries(p: ModelParams, left_x: float = LEFT_BOUNDARY_X) -> tuple[float, float]:
    """Log-coordinate boundaries (regularised extinction state, upper equilibrium)."""
    from .model import equilibria

    eq = equilibria(p)
    if eq.x3 is None:
        raise ValueError("no upper equilibrium for these parameters")
    return math.log(left_x), math.log(eq.x3)
