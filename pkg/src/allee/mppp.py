"""Most probable phase portraits: ridge of the density surface.

For each time slice the most probable state is the argmax of ``p(x, t)``;
the orbit of these maximisers is the most probable orbit.  Changes in the
number of modes between slices mark bifurcation times.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import NumericalError
from .fpe import DensityField, Grid1D, solve_nonlocal_fpe
from .levy import JumpConfig
from .model import ModelParams

__all__ = ["MpppResult", "count_modes", "refine_argmax", "most_probable_orbit", "orbit_family"]

DEFAULT_PROMINENCE = 0.01


@dataclass(frozen=True)
class MpppResult:
    times: np.ndarray
    orbit: np.ndarray
    mode_counts: np.ndarray
    bifurcation_times: list[float]
    x_m_terminal: float
    x0: float

    def rows(self):
        """``(t, x_m, mode_count)`` rows for CSV export."""
        return zip(self.times.tolist(), self.orbit.tolist(), self.mode_counts.tolist())

    def events(self) -> dict:
        return {"x0": self.x0, "bifurcation_times": list(self.bifurcation_times), "x_m_terminal": self.x_m_terminal}


def count_modes(values, prominence: float = DEFAULT_PROMINENCE) -> int:
    """Number of local maxima whose topographic prominence exceeds ``prominence * max``.

    The slice is padded with zeros (density vanishes outside the grid), so a
    maximum sitting on a boundary cell counts as a mode.
    """
    values = np.asarray(values, dtype=float)
    if np.any(values < 0):
        raise ValueError("density slice must be non-negative")
    top = values.max(initial=0.0)
    if top <= 0:
        return 0
    padded = np.concatenate([[0.0], values, [0.0]])
    peaks, _ = find_peaks(padded, prominence=prominence * top)
    return int(len(peaks))


def refine_argmax(values, nodes) -> float:
    """Argmax with a three-point parabolic correction (boundary cells are not refined)."""
    values = np.asarray(values, dtype=float)
    i = int(np.argmax(values))
    if i == 0 or i == len(values) - 1:
        return float(nodes[i])
    left, mid, right = values[i - 1], values[i], values[i + 1]
    denom = left - 2.0 * mid + right
    if denom >= 0:
        return float(nodes[i])
    shift = 0.5 * (left - right) / denom
    h = nodes[i + 1] - nodes[i]
    return float(nodes[i] + np.clip(shift, -0.5, 0.5) * h)


def most_probable_orbit(field: DensityField, prominence: float = DEFAULT_PROMINENCE) -> MpppResult:
    if len(field.times) < 2:
        raise ValueError("need at least two time slices")
    nodes = field.grid.nodes
    orbit, counts = [], []
    for t, row in zip(field.times, field.values):
        if not np.any(row > 0):
            raise NumericalError(f"density slice at t={t:g} is identically zero")
        orbit.append(refine_argmax(row, nodes))
        counts.append(count_modes(row, prominence))
    counts = np.array(counts)
    t = field.times
    change = np.flatnonzero(np.diff(counts) != 0)
    bif = [float(0.5 * (t[i] + t[i + 1])) for i in change]
    orbit = np.array(orbit)
    return MpppResult(t.copy(), orbit, counts, bif, float(orbit[-1]), field.x0)


def orbit_family(
    p: ModelParams,
    cfg: JumpConfig | None,
    grid: Grid1D,
    x0_list,
    T: float,
    prominence: float = DEFAULT_PROMINENCE,
    max_workers: int | None = None,
    **solver_kw,
) -> list[MpppResult]:
    """One most probable orbit per initial condition, in input order."""

    def run(x0):
        return most_probable_orbit(solve_nonlocal_fpe(p, cfg, grid, float(x0), T, **solver_kw), prominence)

    if max_workers and max_workers > 1:
        with ThreadPoolExecutor(max_workers) as ex:
            return list(ex.map(run, x0_list))
    return [run(x0) for x0 in x0_list]
