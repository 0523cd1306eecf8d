"""Experiment configuration: a flat, sectioned key-value document.

Grammar (one item per line)::

    # comment            ; also a comment
    [section]            one of model, jumps, grid, solver, run
    key = value          floats, ints, true/false, "auto", or comma lists

Unknown sections or keys, duplicated keys and malformed values are rejected
with the offending line number.  After parsing every default is filled in,
so :func:`emit_config` writes a complete document that parses back to an
equal :class:`ExperimentConfig`.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError
from .fpe import Grid1D
from .levy import JumpConfig, _default_r_max
from .model import ModelParams

__all__ = [
    "RECIPES",
    "JumpSettings",
    "SolverSettings",
    "RunSettings",
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "emit_config",
]

RECIPES = ("potential", "phaselines", "paths", "transition", "steady_curve", "fpe", "mppp")

# time horizons and initial states that suit each recipe when left unset
_DEFAULT_T = {"paths": 100.0, "transition": 10.0, "fpe": 2.0, "mppp": 5.0}
_DEFAULT_X0 = {"paths": (0.3, 5.0), "fpe": (5.0,), "mppp": (0.3, 5.0, 10.0)}


@dataclass(frozen=True)
class JumpSettings:
    delta: float = 0.1
    r_max: float | None = None
    symmetric: bool = True
    n_quad: int = 256

    def jump_config(self, p: ModelParams) -> JumpConfig:
        return JumpConfig(p.alpha, p.epsilon, self.delta, self.r_max, self.symmetric)


@dataclass(frozen=True)
class SolverSettings:
    dt: float = 1e-3
    T: float = 10.0
    n_paths: int = 500
    n_steps: int = 2000
    dt_pde: float | None = None
    output_every: float = 0.05
    prominence: float = 0.01
    tol: float = 1e-6
    max_iter: int = 200
    left_x: float = 1e-3
    x0_list: tuple[float, ...] = (5.0,)
    lambda_list: tuple[float, ...] = (0.2, 0.4, 0.6)
    gamma3_min: float = 1.0
    gamma3_max: float = 3.5
    gamma3_steps: int = 251
    hold_product: bool = False
    workers: int = 1


@dataclass(frozen=True)
class RunSettings:
    experiment: str = "potential"
    seed: int = 0
    out: str = "out"


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelParams
    jumps: JumpSettings = field(default_factory=JumpSettings)
    grid: Grid1D = field(default_factory=Grid1D)
    solver: SolverSettings = field(default_factory=SolverSettings)
    run: RunSettings = field(default_factory=RunSettings)

    def jump_config(self) -> JumpConfig:
        return self.jumps.jump_config(self.model)


# key -> (dataclass field, kind); "lambda" is spelled lam on ModelParams
_SCHEMA = {
    "model": {
        "s": ("s", "float"), "gamma2": ("gamma2", "float"), "gamma3": ("gamma3", "float"),
        "gamma4": ("gamma4", "float"), "lambda": ("lam", "float"), "epsilon": ("epsilon", "float"),
        "alpha": ("alpha", "float"),
    },
    "jumps": {
        "delta": ("delta", "float"), "r_max": ("r_max", "float?"),
        "symmetric": ("symmetric", "bool"), "n_quad": ("n_quad", "int"),
    },
    "grid": {"x_min": ("x_min", "float"), "x_max": ("x_max", "float"), "n_cells": ("n_cells", "int")},
    "solver": {f.name: (f.name, k) for f, k in zip(fields(SolverSettings), (
        "float", "float", "int", "int", "float?", "float", "float", "float", "int", "float",
        "floats", "floats", "float", "float", "int", "bool", "int",
    ))},
    "run": {"experiment": ("experiment", "str"), "seed": ("seed", "int"), "out": ("out", "str")},
}
_REQUIRED_MODEL = ("s", "gamma2", "gamma3", "gamma4")

_SECTION = re.compile(r"^\[\s*([A-Za-z_]\w*)\s*\]$")
_ITEM = re.compile(r"^([A-Za-z_]\w*)\s*=\s*(.*)$")


def _strip_comment(line: str) -> str:
    for mark in (" #", " ;", "\t#", "\t;"):
        i = line.find(mark)
        if i >= 0:
            line = line[:i]
    return line.strip()


def _convert(raw: str, kind: str, key: str, lineno: int):
    try:
        if kind == "float":
            return float(raw)
        if kind == "float?":
            return None if raw.lower() == "auto" else float(raw)
        if kind == "int":
            return int(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("true", "yes", "on", "1"):
                return True
            if low in ("false", "no", "off", "0"):
                return False
            raise ValueError
        if kind == "floats":
            items = [s.strip() for s in raw.split(",") if s.strip()]
            if not items:
                raise ValueError
            return tuple(float(s) for s in items)
        if not raw:
            raise ValueError
        return raw
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {kind.rstrip('?')}", lineno) from None


def _tokenize(text: str) -> dict[str, dict[str, tuple]]:
    """Section -> key -> (converted value, line number)."""
    out: dict[str, dict[str, tuple]] = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped[0] in "#;":
            continue
        body = _strip_comment(stripped)
        m = _SECTION.match(body)
        if m:
            section = m.group(1).lower()
            if section not in _SCHEMA:
                raise ConfigError(f"unknown section [{section}]; expected one of {', '.join(_SCHEMA)}", lineno)
            if section in out:
                raise ConfigError(f"duplicate section [{section}]", lineno)
            out[section] = {}
            continue
        m = _ITEM.match(body)
        if not m:
            raise ConfigError(f"expected '[section]' or 'key = value', got {stripped!r}", lineno)
        if section is None:
            raise ConfigError("key outside of any section", lineno)
        key, raw = m.group(1), m.group(2).strip()
        if key not in _SCHEMA[section]:
            raise ConfigError(f"unknown key {key!r} in [{section}]", lineno)
        if key in out[section]:
            raise ConfigError(f"duplicate key {key!r} in [{section}]", lineno)
        out[section][key] = (_convert(raw, _SCHEMA[section][key][1], key, lineno), lineno)
    return out


def _build(section: str, cls, items: dict, extra: dict | None = None):
    kwargs = dict(extra or {})
    kwargs.update({_SCHEMA[section][k][0]: v for k, (v, _) in items.items()})
    try:
        return cls(**kwargs)
    except (ValueError, TypeError) as exc:
        linenos = [n for _, n in items.values()]
        # report the first line of the section that could have caused it
        raise ConfigError(f"[{section}] {exc}", _blame(exc, items) or (min(linenos) if linenos else None)) from None


def _blame(exc: Exception, items: dict) -> int | None:
    msg = str(exc)
    for key, (_, lineno) in items.items():
        if re.search(rf"\b{key}\b", msg):
            return lineno
    return None


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a configuration document.

    Raises
    ------
    ConfigError
        On syntax errors, unknown names, malformed values or violated
        parameter invariants; the message carries the line number when one
        can be attributed.
    """
    tok = _tokenize(text)
    if "model" not in tok:
        raise ConfigError("missing required section [model]")
    missing = [k for k in _REQUIRED_MODEL if k not in tok["model"]]
    if missing:
        raise ConfigError(f"[model] missing required key(s): {', '.join(missing)}")
    model = _build("model", ModelParams, tok["model"])

    jumps = _build("jumps", JumpSettings, tok.get("jumps", {}))
    if jumps.r_max is None:
        jumps = replace(jumps, r_max=_default_r_max(model.epsilon))
    if jumps.n_quad < 2:
        raise ConfigError("[jumps] n_quad must be >= 2", _line(tok, "jumps", "n_quad"))
    try:
        jumps.jump_config(model)
    except ValueError as exc:
        raise ConfigError(f"[jumps] {exc}", _blame(exc, tok.get("jumps", {}))) from None

    grid = _build("grid", Grid1D, tok.get("grid", {}))

    run = _build("run", RunSettings, tok.get("run", {}))
    if run.experiment not in RECIPES:
        raise ConfigError(
            f"unknown recipe {run.experiment!r}; known: {', '.join(RECIPES)}", _line(tok, "run", "experiment")
        )

    defaults = {}
    if run.experiment in _DEFAULT_T:
        defaults["T"] = _DEFAULT_T[run.experiment]
    if run.experiment in _DEFAULT_X0:
        defaults["x0_list"] = _DEFAULT_X0[run.experiment]
    solver = _build("solver", SolverSettings, tok.get("solver", {}), defaults)
    _check_solver(solver, tok.get("solver", {}))
    return ExperimentConfig(model, jumps, grid, solver, run)


def _line(tok, section, key):
    return tok.get(section, {}).get(key, (None, None))[1]


def _check_solver(s: SolverSettings, items: dict):
    checks = [
        ("dt", s.dt > 0, "dt must be > 0"),
        ("T", s.T > 0, "T must be > 0"),
        ("n_paths", s.n_paths >= 1, "n_paths must be >= 1"),
        ("n_steps", s.n_steps >= 4, "n_steps must be >= 4"),
        ("dt_pde", s.dt_pde is None or s.dt_pde > 0, "dt_pde must be > 0 or auto"),
        ("output_every", s.output_every > 0, "output_every must be > 0"),
        ("prominence", 0 <= s.prominence < 1, "prominence must lie in [0, 1)"),
        ("tol", s.tol > 0, "tol must be > 0"),
        ("max_iter", s.max_iter >= 1, "max_iter must be >= 1"),
        ("left_x", s.left_x > 0, "left_x must be > 0"),
        ("x0_list", all(x > 0 for x in s.x0_list), "x0_list entries must be > 0"),
        ("lambda_list", all(v >= 0 for v in s.lambda_list), "lambda_list entries must be >= 0"),
        ("gamma3_min", 0 < s.gamma3_min < s.gamma3_max, "need 0 < gamma3_min < gamma3_max"),
        ("gamma3_steps", s.gamma3_steps >= 2, "gamma3_steps must be >= 2"),
        ("workers", s.workers >= 1, "workers must be >= 1"),
    ]
    for key, ok, msg in checks:
        if not ok:
            raise ConfigError(f"[solver] {msg}", items.get(key, (None, None))[1])
    for name in ("dt", "T", "output_every", "tol", "left_x"):
        if not math.isfinite(getattr(s, name)):
            raise ConfigError(f"[solver] {name} must be finite", items.get(name, (None, None))[1])


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def _emit_value(v) -> str:
    if v is None:
        return "auto"
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(repr(float(x)) for x in v)
    return str(v)


def emit_config(cfg: ExperimentConfig) -> str:
    """Complete document for ``cfg``; ``parse_config(emit_config(cfg)) == cfg``."""
    lines = []
    for section in _SCHEMA:
        obj = getattr(cfg, section)
        lines.append(f"[{section}]")
        for key, (attr, _) in _SCHEMA[section].items():
            lines.append(f"{key} = {_emit_value(getattr(obj, attr))}")
        lines.append("")
    return "\n".join(lines)
