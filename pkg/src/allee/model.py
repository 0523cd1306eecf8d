"""Deterministic skeleton of the single-species Allee model.

The per-capita growth rate is

    h(x) = s - gamma2 * x - gamma3 / (gamma3 * gamma4 * x + 1)

and the drift is ``F(x) = x * h(x)``.  ``F`` is the negative gradient of the
potential ``U`` returned by :func:`potential`.  Positive equilibria solve the
quadratic

    gamma2*gamma3*gamma4 * x**2 - (s*gamma3*gamma4 - gamma2) * x + (gamma3 - s) = 0
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from .errors import NoBracketError

__all__ = [
    "ModelParams",
    "Equilibria",
    "BranchRow",
    "BranchTable",
    "per_capita_growth",
    "growth_slope",
    "growth_curvature",
    "drift",
    "drift_derivative",
    "potential",
    "bifurcation_parameter",
    "equilibria",
    "critical_attack_rate",
    "fold_attack_rate",
    "bifurcation_scan",
]

BETA_ONE_RTOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Model constants and noise intensities.

    ``lam`` is the Gaussian noise intensity (``lambda`` is reserved in Python).
    """

    s: float
    gamma2: float
    gamma3: float
    gamma4: float
    lam: float = 0.0
    epsilon: float = 0.0
    alpha: float = 1.5

    def __post_init__(self):
        for name in ("s", "gamma2", "gamma3", "gamma4"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be > 0, got {v!r}")
        if not (np.isfinite(self.lam) and self.lam >= 0):
            raise ValueError(f"lambda must be >= 0, got {self.lam!r}")
        if not (np.isfinite(self.epsilon) and self.epsilon >= 0):
            raise ValueError(f"epsilon must be >= 0, got {self.epsilon!r}")
        if not (0 < self.alpha < 2):
            raise ValueError(f"alpha must lie in (0, 2), got {self.alpha!r}")

    @property
    def k(self) -> float:
        """Product gamma3 * gamma4 (attack rate times handling time)."""
        return self.gamma3 * self.gamma4

    @property
    def carrying_capacity(self) -> float:
        return self.s / self.gamma2

    def with_gamma3(self, gamma3: float, hold_product: bool = False) -> "ModelParams":
        """Copy with a new attack rate.

        With ``hold_product`` the handling time is rescaled so that
        ``gamma3 * gamma4`` keeps its current value (the ``gamma4 = 1/gamma3``
        family used when sweeping the attack rate).
        """
        if hold_product:
            return replace(self, gamma3=gamma3, gamma4=self.k / gamma3)
        return replace(self, gamma3=gamma3)


def per_capita_growth(x, p: ModelParams):
    """h(x), the per-capita growth rate."""
    x = np.asarray(x, dtype=float)
    return p.s - p.gamma2 * x - p.gamma3 / (p.k * x + 1.0)


def growth_slope(x, p: ModelParams):
    """h'(x)."""
    x = np.asarray(x, dtype=float)
    return -p.gamma2 + p.gamma3 * p.k / (p.k * x + 1.0) ** 2


def growth_curvature(x, p: ModelParams):
    """h''(x)."""
    x = np.asarray(x, dtype=float)
    return -2.0 * p.gamma3 * p.k**2 / (p.k * x + 1.0) ** 3


def drift(x, p: ModelParams):
    """F(x) = x * h(x)."""
    x = np.asarray(x, dtype=float)
    out = x * (p.s - p.gamma2 * x - p.gamma3 / (p.k * x + 1.0))
    return out if out.ndim else float(out)


def drift_derivative(x, p: ModelParams):
    """F'(x) = s - 2*gamma2*x - gamma3/(gamma3*gamma4*x + 1)**2."""
    x = np.asarray(x, dtype=float)
    out = p.s - 2.0 * p.gamma2 * x - p.gamma3 / (p.k * x + 1.0) ** 2
    return out if out.ndim else float(out)


def potential(x, p: ModelParams):
    """Potential U with ``-dU/dx = drift``.

    Raises
    ------
    ValueError
        If ``gamma3*gamma4*x + 1 <= 0`` anywhere (logarithm undefined).
    """
    x = np.asarray(x, dtype=float)
    arg = p.k * x + 1.0
    if np.any(arg <= 0):
        raise ValueError("potential undefined where gamma3*gamma4*x + 1 <= 0")
    out = (
        -p.s * x**2 / 2.0
        + p.gamma2 * x**3 / 3.0
        + p.gamma3 / p.k**2 * (p.k * x + 1.0 - np.log(arg))
    )
    return out if out.ndim else float(out)


def bifurcation_parameter(p: ModelParams) -> float:
    """beta = 4*g2*g3*g4*(g3 - s) / (s*g3*g4 - g2)**2."""
    b = p.s * p.k - p.gamma2
    if b == 0:
        return math.inf
    return 4.0 * p.gamma2 * p.k * (p.gamma3 - p.s) / b**2


@dataclass(frozen=True)
class Equilibria:
    """Fixed points of the deterministic model.

    ``regime`` is one of ``"bistable"`` (x2 < x3 both positive),
    ``"degenerate"`` (beta == 1, double root x4), ``"extinction-only"``
    (no positive root) or ``"monostable"`` (gamma3 < s: the lower root is
    negative, so only x3 is a population state).
    """

    beta: float
    carrying_capacity: float
    regime: str
    x1: float = 0.0
    x2: float | None = None
    x3: float | None = None
    x4: float | None = None
    stability: dict = field(default_factory=dict)

    def positive(self) -> list[float]:
        return [v for v in (self.x2, self.x3, self.x4) if v is not None]


def _newton_polish(x: float, p: ModelParams) -> float:
    # one guarded Newton step on h (same roots as F for x > 0, better scaled)
    d = float(growth_slope(x, p))
    if d == 0 or not np.isfinite(d):
        return x
    step = float(per_capita_growth(x, p)) / d
    if abs(step) > 1e-6 * max(1.0, abs(x)):
        return x
    return x - step


def _label(x: float, p: ModelParams) -> str:
    d = drift_derivative(x, p)
    if abs(d) < 1e-9:
        return "semi-stable"
    return "stable" if d < 0 else "unstable"


def equilibria(p: ModelParams) -> Equilibria:
    """Closed-form equilibria with stability labels."""
    beta = bifurcation_parameter(p)
    M = p.carrying_capacity
    a = p.gamma2 * p.k
    b = p.s * p.k - p.gamma2
    c = p.gamma3 - p.s
    stab = {"x1": "stable" if p.s - p.gamma3 < 0 else ("unstable" if p.s > p.gamma3 else "semi-stable")}

    if b <= 0 and c >= 0:
        return Equilibria(beta, M, "extinction-only", stability=stab)
    if abs(beta - 1.0) <= BETA_ONE_RTOL:
        x4 = b / (2.0 * a)
        stab["x4"] = "semi-stable"
        return Equilibria(beta, M, "degenerate", x4=x4, stability=stab)
    if beta > 1.0:
        return Equilibria(beta, M, "extinction-only", stability=stab)

    disc = math.sqrt(b * b - 4.0 * a * c)
    # larger root by the stable branch of the quadratic formula, smaller via Vieta
    x3 = (b + disc) / (2.0 * a) if b > 0 else 2.0 * c / (b - disc)
    x2 = c / (a * x3)
    x3 = _newton_polish(x3, p)
    if x2 <= 0:
        stab["x3"] = _label(x3, p)
        return Equilibria(beta, M, "monostable", x3=x3, stability=stab)
    x2 = _newton_polish(x2, p)
    stab["x2"] = _label(x2, p)
    stab["x3"] = _label(x3, p)
    return Equilibria(beta, M, "bistable", x2=x2, x3=x3, stability=stab)


def _potential_gap(gamma3: float, p: ModelParams, hold_product: bool) -> float:
    q = p.with_gamma3(gamma3, hold_product)
    eq = equilibria(q)
    if eq.x3 is None:
        return math.nan
    return potential(0.0, q) - potential(eq.x3, q)


def critical_attack_rate(
    p: ModelParams,
    hold_product: bool = False,
    bracket: tuple[float, float] | None = None,
    n_scan: int = 1000,
) -> float:
    """Attack rate at which U(0) = U(x3).

    Scans ``gamma3`` over ``bracket`` (default ``(s, (1+gamma2)**2/(4*gamma2))``)
    for a sign change of ``U(0) - U(x3)`` and polishes it with Brent's method.
    ``hold_product`` keeps ``gamma3*gamma4`` fixed while ``gamma3`` varies.
    """
    if bracket is None:
        bracket = (p.s, (1.0 + p.gamma2) ** 2 / (4.0 * p.gamma2))
    lo, hi = bracket
    grid = np.linspace(lo, hi, n_scan + 2)[1:-1]
    vals = np.array([_potential_gap(g, p, hold_product) for g in grid])
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if np.isfinite(a) and np.isfinite(b) and np.sign(a) != np.sign(b):
            return brentq(_potential_gap, grid[i], grid[i + 1], args=(p, hold_product), xtol=1e-14, rtol=1e-14)
    raise NoBracketError(f"U(0) - U(x3) has no sign change for gamma3 in ({lo}, {hi})")


def fold_attack_rate(p: ModelParams, hold_product: bool, bracket: tuple[float, float]) -> float | None:
    """Root of beta(gamma3) = 1 inside ``bracket``, or None if beta - 1 keeps its sign."""
    f = lambda g: bifurcation_parameter(p.with_gamma3(g, hold_product)) - 1.0
    a, b = f(bracket[0]), f(bracket[1])
    if not (np.isfinite(a) and np.isfinite(b)) or np.sign(a) == np.sign(b):
        return None
    return brentq(f, *bracket, xtol=1e-14, rtol=1e-14)


@dataclass(frozen=True)
class BranchRow:
    gamma3: float
    beta: float
    x1: float
    x2: float | None
    x3: float | None
    stability_pattern: str


@dataclass(frozen=True)
class BranchTable:
    rows: list[BranchRow]
    fold_gamma3: float | None
    fold_x: float | None

    HEADER = ("gamma3", "beta", "x1", "x2", "x3", "stability_pattern")

    def as_records(self) -> list[tuple]:
        return [(r.gamma3, r.beta, r.x1, r.x2, r.x3, r.stability_pattern) for r in self.rows]


_ABBREV = {"stable": "S", "unstable": "U", "semi-stable": "N"}


def bifurcation_scan(
    p: ModelParams,
    gamma3_range: tuple[float, float],
    steps: int,
    hold_product: bool = False,
) -> BranchTable:
    """Equilibrium branches over an attack-rate sweep, plus the saddle-node fold."""
    if steps < 2:
        raise ValueError("steps must be >= 2")
    fold = fold_attack_rate(p, hold_product, gamma3_range)
    grid = np.linspace(gamma3_range[0], gamma3_range[1], steps)
    if fold is not None and not np.any(grid == fold):
        # the fold itself is a row, so the table shows x2 and x3 meeting
        grid = np.sort(np.append(grid, fold))
    rows = []
    for g in grid:
        q = p.with_gamma3(float(g), hold_product)
        eq = equilibria(q)
        x2 = eq.x2 if eq.x2 is not None else eq.x4
        x3 = eq.x3 if eq.x3 is not None else eq.x4
        labels = [eq.stability["x1"]] + [eq.stability[k] for k in ("x2", "x4", "x3") if k in eq.stability]
        rows.append(BranchRow(float(g), eq.beta, 0.0, x2, x3, "-".join(_ABBREV[s] for s in labels)))
    fold_x = None
    if fold is not None:
        q = p.with_gamma3(fold, hold_product)
        fold_x = (q.s * q.k - q.gamma2) / (2.0 * q.gamma2 * q.k)
    return BranchTable(rows, fold, fold_x)
