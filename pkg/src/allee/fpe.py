"""Finite-volume solvers for the density of the population process.

The density lives on cell centres of a uniform grid over ``[x_min, x_max]``.
The evolution operator ``A`` (so that ``dp/dt = A p``) has three parts:

* transport ``-d/dx[v(x) p]`` with ``v = F(x) - m x`` (``m`` the jump
  compensator), first-order upwind fluxes;
* diffusion ``(lam**2/2) d2/dx2[x**2 p]`` in conservative central form;
* the jump term, the transpose of the interpolated generator
  ``sum_k w_k [f(x (1 + eps y_k)) - f(x)]``.  Mass sent by a jump to
  ``x (1 + eps y)`` is split linearly between the two neighbouring cells,
  so each column of the jump block sums to zero unless the target leaves
  the domain (density is zero outside; that mass is lost).

Fluxes through the two domain faces are zero for the local terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import InstabilityError, StepSizeError
from .levy import JumpConfig, compensator_drift, jump_quadrature
from .model import BranchTable, ModelParams, bifurcation_scan, drift, equilibria

__all__ = [
    "Grid1D",
    "DensityField",
    "initial_bump",
    "assemble_generator_adjoint",
    "assemble_local_operator",
    "stable_time_step",
    "solve_nonlocal_fpe",
    "solve_local_fpe",
    "stationary_extrema",
    "steady_state_curve",
]

BUMP_WIDTH = 40.0
GROWTH_LIMIT = 10.0
CLAMP_LIMIT = 1e-6


@dataclass(frozen=True)
class Grid1D:
    x_min: float = 0.0
    x_max: float = 15.0
    n_cells: int = 600

    def __post_init__(self):
        if self.x_min < 0:
            raise ValueError("x_min must be >= 0")
        if self.x_max <= self.x_min:
            raise ValueError("x_max must exceed x_min")
        if self.n_cells < 16:
            raise ValueError("n_cells must be >= 16")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / self.n_cells

    @property
    def nodes(self) -> np.ndarray:
        """Cell centres."""
        return self.x_min + (np.arange(self.n_cells) + 0.5) * self.spacing

    @property
    def faces(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_cells + 1) * self.spacing

    def mass(self, p) -> np.ndarray:
        return np.sum(p, axis=-1) * self.spacing


def initial_bump(grid: Grid1D, x0: float) -> np.ndarray:
    """sqrt(40/pi) * exp(-40 (x - x0)**2) sampled at the cell centres."""
    return math.sqrt(BUMP_WIDTH / math.pi) * np.exp(-BUMP_WIDTH * (grid.nodes - x0) ** 2)


@dataclass(frozen=True)
class DensityField:
    grid: Grid1D
    times: np.ndarray
    values: np.ndarray  # shape (n_times, n_cells)
    x0: float
    mass: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values.setflags(write=False)

    def slice_at(self, t: float) -> np.ndarray:
        return self.values[int(np.argmin(np.abs(self.times - t)))]

    def long_rows(self):
        """``(t, x, p)`` rows in long format."""
        x = self.grid.nodes.tolist()
        for t, row in zip(self.times.tolist(), self.values.tolist()):
            for xi, pi in zip(x, row):
                yield t, xi, pi


def _transport_diffusion(v_faces: np.ndarray, diff: float, grid: Grid1D) -> sp.csr_matrix:
    n, h, x = grid.n_cells, grid.spacing, grid.nodes
    vp = np.maximum(v_faces, 0.0)
    vm = np.minimum(v_faces, 0.0)
    # flux through face i+1/2 = a_i p_i + b_i p_{i+1}, interior faces only
    a = vp / h + diff * x[:-1] ** 2 / h**2
    b = vm / h - diff * x[1:] ** 2 / h**2
    # -(flux_out - flux_in)/h contributions
    main = np.zeros(n)
    main[:-1] -= a
    main[1:] += b
    upper = -b  # coefficient of p_{i+1} in row i
    lower = a  # coefficient of p_{i-1} in row i
    return sp.diags([lower, main, upper], [-1, 0, 1], shape=(n, n), format="csr")


def _jump_block(cfg: JumpConfig, grid: Grid1D, n_quad: int) -> np.ndarray:
    n, h = grid.n_cells, grid.spacing
    x = grid.nodes
    y, w = jump_quadrature(cfg, n_quad)
    factor = 1.0 + cfg.epsilon * y
    if np.any(factor <= 0):
        raise ValueError("a jump maps a grid node to 1 + eps*y <= 0")
    J = np.zeros((n, n))
    cols = np.arange(n)
    for fk, wk in zip(factor, w):
        target = x * fk
        inside = target <= grid.x_max
        q = np.clip((target - x[0]) / h, 0.0, n - 1.0)
        i0 = np.minimum(np.floor(q).astype(int), n - 2)
        frac = q - i0
        c = cols[inside]
        np.add.at(J, (i0[inside], c), wk * (1.0 - frac[inside]))
        np.add.at(J, (i0[inside] + 1, c), wk * frac[inside])
    J[cols, cols] -= w.sum()
    return J


def assemble_generator_adjoint(
    p: ModelParams,
    cfg: JumpConfig | None,
    grid: Grid1D,
    n_quad: int = 256,
) -> sp.csr_matrix:
    """Operator ``A`` of ``dp/dt = A p`` for the jump-diffusion density."""
    comp = compensator_drift(cfg) if cfg is not None else 0.0
    xf = grid.faces[1:-1]
    v = drift(xf, p) - comp * xf
    A = _transport_diffusion(v, p.lam**2 / 2.0, grid)
    if cfg is not None and cfg.epsilon > 0:
        A = sp.csr_matrix(A + _jump_block(cfg, grid, n_quad))
    return A


def assemble_local_operator(p: ModelParams, grid: Grid1D) -> sp.csr_matrix:
    """Gaussian-noise operator built face by face (independent of the vectorised path)."""
    n, h = grid.n_cells, grid.spacing
    D = 0.5 * p.lam * p.lam
    rows, cols, vals = [], [], []
    for i in range(n - 1):
        xf = grid.x_min + (i + 1) * h
        vf = float(drift(xf, p))
        xl = grid.x_min + (i + 0.5) * h
        xr = grid.x_min + (i + 1.5) * h
        # flux through this face as coefficients on (p_i, p_{i+1})
        cl = (vf if vf > 0 else 0.0) / h + D * xl * xl / (h * h)
        cr = (vf if vf < 0 else 0.0) / h - D * xr * xr / (h * h)
        # the flux leaves cell i and enters cell i+1
        rows += [i, i, i + 1, i + 1]
        cols += [i, i + 1, i, i + 1]
        vals += [-cl, -cr, cl, cr]
    return sp.csr_matrix(sp.coo_matrix((vals, (rows, cols)), shape=(n, n)))


def stable_time_step(p: ModelParams, cfg: JumpConfig | None, grid: Grid1D, n_quad: int = 256) -> float:
    """Largest explicit step allowed by the transport, diffusion and jump-rate bounds."""
    h = grid.spacing
    comp = compensator_drift(cfg) if cfg is not None else 0.0
    xs = np.linspace(grid.x_min, grid.x_max, 4 * grid.n_cells + 1)
    vmax = float(np.max(np.abs(drift(xs, p) - comp * xs)))
    bounds = [0.4 * h * h / (p.lam**2 * grid.x_max**2 + 1e-12)]
    if vmax > 0:
        bounds.append(0.4 * h / vmax)
    if cfg is not None and cfg.epsilon > 0:
        bounds.append(0.4 / jump_quadrature(cfg, n_quad)[1].sum())
    return min(bounds)


def _integrate(A, grid: Grid1D, x0: float, T: float, dt_pde, output_every: float, dt_max: float, meta: dict):
    if not grid.x_min < x0 < grid.x_max:
        raise ValueError("x0 must lie inside the grid")
    if T <= 0:
        raise ValueError("T must be > 0")
    if dt_pde is not None and dt_pde > dt_max * (1 + 1e-12):
        raise StepSizeError(f"dt_pde={dt_pde} exceeds the stability bound {dt_max:.3g}")
    dt_cap = dt_max if dt_pde is None else dt_pde
    n_out = max(1, int(round(T / output_every)))
    interval = T / n_out
    n_sub = max(1, math.ceil(interval / dt_cap - 1e-9))
    dt = interval / n_sub

    p = initial_bump(grid, x0)
    limit = GROWTH_LIMIT * p.max()
    times, slices, mass = [0.0], [p.copy()], [float(grid.mass(p))]
    for k in range(n_out):
        for _ in range(n_sub):
            k1 = A @ p
            k2 = A @ (p + dt * k1)
            p = p + 0.5 * dt * (k1 + k2)
            neg = p < 0
            if neg.any():
                clamped = -p[neg].sum()
                if clamped > CLAMP_LIMIT * max(p.sum(), 1e-300):
                    raise InstabilityError("negative density beyond the clamp tolerance")
                p[neg] = 0.0
        if not np.all(np.isfinite(p)) or p.max() > limit:
            raise InstabilityError(f"density max {p.max():.3g} exceeds {GROWTH_LIMIT}x the initial max")
        times.append((k + 1) * interval)
        slices.append(p.copy())
        mass.append(float(grid.mass(p)))
    meta = dict(meta, dt_pde=dt, output_every=interval)
    return DensityField(grid, np.array(times), np.array(slices), x0, np.array(mass), meta)


def solve_nonlocal_fpe(
    p: ModelParams,
    cfg: JumpConfig | None,
    grid: Grid1D,
    x0: float,
    T: float,
    dt_pde: float | None = None,
    output_every: float = 0.05,
    n_quad: int = 256,
) -> DensityField:
    """Evolve the initial bump at ``x0`` to time ``T`` under the full operator.

    Heun (explicit RK2) stepping; ``dt_pde=None`` takes the largest stable
    step that divides the output interval.
    """
    if cfg is None and p.epsilon > 0:
        cfg = JumpConfig.from_params(p)
    A = assemble_generator_adjoint(p, cfg, grid, n_quad)
    dt_max = stable_time_step(p, cfg, grid, n_quad)
    meta = {"solver": "nonlocal", "n_quad": n_quad}
    return _integrate(A, grid, x0, T, dt_pde, output_every, dt_max, meta)


def solve_local_fpe(
    p: ModelParams,
    grid: Grid1D,
    x0: float,
    T: float,
    dt_pde: float | None = None,
    output_every: float = 0.05,
) -> DensityField:
    """Gaussian-noise counterpart of :func:`solve_nonlocal_fpe` (epsilon ignored)."""
    p = replace(p, epsilon=0.0)
    A = assemble_local_operator(p, grid)
    dt_max = stable_time_step(p, None, grid)
    return _integrate(A, grid, x0, T, dt_pde, output_every, dt_max, {"solver": "local"})


def stationary_extrema(p: ModelParams, lam: float) -> list[tuple[float, str]]:
    """Extrema of the stationary density under Gaussian noise of intensity ``lam``.

    Roots of ``x (h(x) - lam**2) = 0`` for ``x >= 0``, each labelled
    ``"maximum"`` or ``"minimum"`` by the sign of the expression's slope
    (the density increases where the expression is positive).
    """
    if lam < 0:
        raise ValueError("lam must be >= 0")
    shifted_s = p.s - lam**2
    out = [(0.0, "maximum" if shifted_s - p.gamma3 < 0 else "minimum")]
    if shifted_s <= 0:
        return out
    q = replace(p, s=shifted_s, lam=0.0)
    eq = equilibria(q)
    for x in eq.positive():
        d = float(_extremum_slope(x, q))
        out.append((x, "maximum" if d < 0 else ("minimum" if d > 0 else "inflection")))
    return out


def _extremum_slope(x, q: ModelParams):
    # d/dx [x h_shifted(x)]; q already carries s - lam**2
    return q.s - 2 * q.gamma2 * x - q.gamma3 / (q.k * x + 1) ** 2


def steady_state_curve(
    p: ModelParams,
    lam: float,
    gamma3_range: tuple[float, float],
    steps: int,
    hold_product: bool = False,
) -> BranchTable:
    """Stationary-density extrema over an attack-rate sweep.

    Same layout as :func:`~allee.model.bifurcation_scan`; the ``beta`` column
    refers to the noise-shifted quadratic (growth rate ``s - lam**2``).
    """
    shifted_s = p.s - lam**2
    if shifted_s <= 0:
        from .model import BranchRow

        rows = [BranchRow(float(g), math.inf, 0.0, None, None, "S") for g in np.linspace(*gamma3_range, steps)]
        return BranchTable(rows, None, None)
    return bifurcation_scan(replace(p, s=shifted_s, lam=0.0), gamma3_range, steps, hold_product)
