"""Experiment runner: configs, time stepping, error norms, convergence and snapshots.

Configs are flat ``key = value`` text files with ``#`` comments.  The
``experiment`` key selects a built-in setup whose defaults every other key
may override.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .deviation import SCHEMES, SchemeConfig, StationaryState
from .errors import ConfigError, GridMismatch, NonPositiveError, SolverError
from .fullkt import SpeedField, fully_discrete_speeds, local_speeds, step_fully_discrete
from .grid import BoundarySpec, Grid2D, StateField, fill_ghosts, make_grid
from .models import (EulerModel, burgers, euler_pressure, isothermal_equilibrium,
                     linear_potential, moving_equilibrium, moving_potential_gradient,
                     perturbed_isothermal, shock_tube)
from .semikt import (cfl_report, max_principle_monitor, reconstruct_interfaces,
                     step_semi_discrete)

EQUILIBRIA = ("isothermal", "moving", "none")


# Configuration ---------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    experiment: str = "isothermal"
    scheme: str = "fully_discrete"
    nx: int = 200
    ny: int = 200
    x_min: float = 0.0
    x_max: float = 1.0
    y_min: float = 0.0
    y_max: float = 1.0
    t_end: float = 0.25
    cfl: float = 0.45
    theta: float = 1.5
    eps: float = 1e-8
    eta: float = 1e-2
    gamma: float = 1.4
    bc_x_lo: str = "outflow"
    bc_x_hi: str = "outflow"
    bc_y_lo: str = "outflow"
    bc_y_hi: str = "outflow"
    equilibrium: str = "isothermal"
    rho0: float = 1.21
    p0: float = 1.0
    phi_x: float = 1.0
    phi_y: float = 1.0
    integrator: str = "forward_euler"
    projection_slopes: bool = True
    speed_floor: float = 1e-12
    seed: int = 0
    max_steps: int = 0
    monitor: bool = False
    snapshot_times: tuple = ()
    output_dir: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; "
                              f"built-ins: {', '.join(sorted(EXPERIMENTS))}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.equilibrium not in EQUILIBRIA:
            raise ConfigError(f"equilibrium must be one of {EQUILIBRIA}, got {self.equilibrium!r}")
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.t_end < 0:
            raise ConfigError(f"t_end must be nonnegative, got {self.t_end}")
        if self.max_steps < 0:
            raise ConfigError(f"max_steps must be nonnegative, got {self.max_steps}")
        for t in self.snapshot_times:
            if not 0.0 <= t <= self.t_end:
                raise ConfigError(f"snapshot time {t} lies outside [0, t_end={self.t_end}]")
        # raises on bad cell counts, bounds and boundary kinds
        self.grid()
        self.scheme_config()

    def grid(self) -> Grid2D:
        return make_grid(self.nx, self.ny, (self.x_min, self.x_max, self.y_min, self.y_max))

    def boundary(self) -> BoundarySpec:
        return BoundarySpec(self.bc_x_lo, self.bc_x_hi, self.bc_y_lo, self.bc_y_hi)

    def scheme_config(self) -> SchemeConfig:
        return SchemeConfig(theta=self.theta, eps=self.eps, cfl=self.cfl, bc=self.boundary(),
                            projection_slopes=self.projection_slopes,
                            speed_floor=self.speed_floor, integrator=self.integrator)

    def with_overrides(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


CONFIG_KEYS: dict[str, str] = {
    "experiment": "built-in experiment name (see `list`)",
    "scheme": "fully_discrete or semi_discrete",
    "nx": "cells along x",
    "ny": "cells along y",
    "x_min": "domain bound", "x_max": "domain bound",
    "y_min": "domain bound", "y_max": "domain bound",
    "t_end": "final time",
    "cfl": "CFL number in (0, 1)",
    "theta": "MC-theta limiter parameter in [1, 2]",
    "eps": "speed floor of the fully-discrete scheme",
    "eta": "amplitude of the pressure perturbation",
    "gamma": "ratio of specific heats",
    "bc": "boundary kind on all four sides (outflow, reflecting, periodic)",
    "bc_x_lo": "boundary kind on one side", "bc_x_hi": "boundary kind on one side",
    "bc_y_lo": "boundary kind on one side", "bc_y_hi": "boundary kind on one side",
    "equilibrium": "stationary state subtracted: isothermal, moving or none",
    "rho0": "isothermal reference density",
    "p0": "isothermal reference pressure",
    "phi_x": "x slope of the linear potential",
    "phi_y": "y slope of the linear potential",
    "integrator": "semi-discrete time stepper: forward_euler or ssp_rk2",
    "projection_slopes": "fully-discrete projection with (true) or without (false) slopes",
    "speed_floor": "semi-discrete floor on a+ - a- at dead interfaces",
    "seed": "random seed for randomized initial data",
    "max_steps": "stop after this many steps (0 = no limit)",
    "monitor": "record the maximum-principle monitor (scalar, semi-discrete)",
    "snapshot_times": "comma-separated output times (t_end is always written)",
    "output_dir": "directory for snapshot and table files",
}


def _parse_value(key: str, raw: str, kind):
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is tuple:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


_FIELD_TYPES = {"experiment": str, "scheme": str, "nx": int, "ny": int, "x_min": float,
                "x_max": float, "y_min": float, "y_max": float, "t_end": float, "cfl": float,
                "theta": float, "eps": float, "eta": float, "gamma": float, "bc_x_lo": str,
                "bc_x_hi": str, "bc_y_lo": str, "bc_y_hi": str, "equilibrium": str,
                "rho0": float, "p0": float, "phi_x": float, "phi_y": float, "integrator": str,
                "projection_slopes": bool, "speed_floor": float, "seed": int, "max_steps": int,
                "monitor": bool, "snapshot_times": tuple, "output_dir": str}


def parse_config_text(text: str, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    """Parse ``key = value`` lines; later keys and then ``overrides`` win."""
    raw: dict[str, str] = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {n}: unknown key {key!r}")
        raw[key] = value
    raw.update(overrides or {})
    for key in raw:
        if key not in CONFIG_KEYS:
            raise ConfigError(f"unknown key {key!r}")
    name = raw.get("experiment", "").strip()
    if not name:
        raise ConfigError("config must set experiment")
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}; built-ins: {', '.join(sorted(EXPERIMENTS))}")
    values = dict(EXPERIMENTS[name].defaults)
    if "bc" in raw:
        kind = raw.pop("bc").strip()
        values.update(bc_x_lo=kind, bc_x_hi=kind, bc_y_lo=kind, bc_y_hi=kind)
    for key, value in raw.items():
        values[key] = _parse_value(key, value, _FIELD_TYPES[key])
    values["experiment"] = name
    return ExperimentConfig(**values)


def load_config(path, overrides: dict[str, str] | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, overrides)


def config_for(name: str, **overrides) -> ExperimentConfig:
    """Built-in experiment with keyword overrides."""
    if name not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {name!r}")
    values = dict(EXPERIMENTS[name].defaults)
    values.update(overrides)
    values["experiment"] = name
    return ExperimentConfig(**values)


# Experiments -------------------------------------------------------------------------

@dataclass
class Setup:
    model: object
    stat: StationaryState
    initial: np.ndarray            # full conserved state on interior cells
    exact: np.ndarray | None = None  # exact full state at t_end, if known


@dataclass
class Experiment:
    name: str
    description: str
    defaults: dict
    build: Callable[[ExperimentConfig, Grid2D], Setup]
    long_axis: str | None = None   # quasi-1D runs refine along this axis only


def _stationary(cfg: ExperimentConfig) -> StationaryState:
    g = cfg.gamma
    if cfg.equilibrium == "none":
        return StationaryState.zero(4)
    if cfg.equilibrium == "isothermal":
        rho0, p0, px, py = cfg.rho0, cfg.p0, cfg.phi_x, cfg.phi_y

        def iso(x, y):
            return isothermal_equilibrium(x, y, rho0, p0, px, py).conserved(g)
        return StationaryState(iso, 4, "isothermal")

    def moving(x, y):
        return moving_equilibrium(x, y, gamma=g).conserved(g)
    return StationaryState(moving, 4, "moving")


def _build_isothermal(cfg, grid):
    X, Y = grid.mesh()
    q = isothermal_equilibrium(X, Y, cfg.rho0, cfg.p0, cfg.phi_x, cfg.phi_y).conserved(cfg.gamma)
    return Setup(EulerModel(cfg.gamma, linear_potential(cfg.phi_x, cfg.phi_y)), _stationary(cfg), q, q)


def _build_perturbed(axis):
    def build(cfg, grid):
        X, Y = grid.mesh()
        q = perturbed_isothermal(X, Y, cfg.eta, axis).conserved(cfg.gamma)
        return Setup(EulerModel(cfg.gamma, linear_potential(cfg.phi_x, cfg.phi_y)), _stationary(cfg), q)
    return build


def _build_moving(cfg, grid):
    X, Y = grid.mesh()
    q = moving_equilibrium(X, Y, gamma=cfg.gamma).conserved(cfg.gamma)
    return Setup(EulerModel(cfg.gamma, moving_potential_gradient(cfg.gamma)), _stationary(cfg), q, q)


def _build_shock_tube(cfg, grid):
    X, Y = grid.mesh()
    q = shock_tube(X, Y).conserved(cfg.gamma)
    return Setup(EulerModel(cfg.gamma, linear_potential(cfg.phi_x, cfg.phi_y)), _stationary(cfg), q)


def smooth_random_field(X, Y, seed: int, modes: int = 3) -> np.ndarray:
    """Random periodic trigonometric polynomial with values in about [-1, 1]."""
    rng = np.random.default_rng(seed)
    u = np.zeros_like(X)
    for m in range(modes + 1):
        for n in range(modes + 1):
            if m == n == 0:
                continue
            amp = rng.normal() / (m * m + n * n)
            ph = rng.uniform(0, 2 * np.pi)
            u += amp * np.sin(2 * np.pi * (m * X + n * Y) + ph)
    scale = np.max(np.abs(u))
    return u / scale if scale > 0 else u


def _build_burgers(cfg, grid):
    X, Y = grid.mesh()
    u = smooth_random_field(X, Y, cfg.seed)
    return Setup(burgers(), StationaryState.zero(1), u[None])


_QUASI_X = dict(x_min=0.0, x_max=1.0, y_min=0.0, y_max=0.1)
_QUASI_Y = dict(x_min=0.0, x_max=0.1, y_min=0.0, y_max=1.0)
_ISO_PERT = dict(rho0=1.0, p0=1.0, eta=1e-2, equilibrium="isothermal")

EXPERIMENTS: dict[str, Experiment] = {
    e.name: e for e in [
        Experiment("isothermal", "hydrostatic isothermal state under phi = x + y, kept exactly",
                   dict(nx=200, ny=200, t_end=0.25, phi_x=1.0, phi_y=1.0), _build_isothermal),
        Experiment("perturbed_x", "isothermal state along x with a small Gaussian pressure pulse",
                   dict(nx=200, ny=200, t_end=0.25, phi_x=1.0, phi_y=0.0, **_ISO_PERT),
                   _build_perturbed("x")),
        Experiment("perturbed_y", "isothermal state along y with a small Gaussian pressure pulse",
                   dict(nx=200, ny=200, t_end=0.25, phi_x=0.0, phi_y=1.0, **_ISO_PERT),
                   _build_perturbed("y")),
        Experiment("moving_x", "moving equilibrium with nonlinear potential, quasi-1D along x",
                   dict(nx=60, ny=10, t_end=0.25, equilibrium="moving", **_QUASI_X),
                   _build_moving, "x"),
        Experiment("moving_y", "moving equilibrium with nonlinear potential, quasi-1D along y",
                   dict(nx=10, ny=60, t_end=0.25, equilibrium="moving", **_QUASI_Y),
                   _build_moving, "y"),
        Experiment("shock_tube", "Sod-type shock tube along x under gravity, reflecting walls",
                   dict(nx=400, ny=10, t_end=0.2, phi_x=1.0, phi_y=0.0, rho0=1.21, p0=1.0,
                        bc_x_lo="reflecting", bc_x_hi="reflecting", bc_y_lo="reflecting",
                        bc_y_hi="reflecting", **_QUASI_X),
                   _build_shock_tube, "x"),
        Experiment("burgers", "2D Burgers, random smooth periodic data, forward Euler at CFL 1/8",
                   dict(nx=64, ny=64, t_end=10.0, max_steps=200, scheme="semi_discrete", cfl=0.125,
                        equilibrium="none", bc_x_lo="periodic", bc_x_hi="periodic",
                        bc_y_lo="periodic", bc_y_hi="periodic", monitor=True),
                   _build_burgers),
    ]
}


# Time step and norms -------------------------------------------------------------------

def compute_dt(speeds: SpeedField, grid: Grid2D, cfl: float) -> float:
    """``cfl * min(dx / max(a+, -a-), dy / max(b+, -b-))``; ``inf`` if no wave moves."""
    ax, by = speeds.max_speeds()
    return cfl * min(grid.dx / ax if ax > 0 else math.inf, grid.dy / by if by > 0 else math.inf)


def restrict(values: np.ndarray, fine: Grid2D, coarse: Grid2D) -> np.ndarray:
    """Block means of fine-grid cell data onto a coarser grid of the same domain."""
    same_domain = np.allclose([fine.x_min, fine.x_max, fine.y_min, fine.y_max],
                              [coarse.x_min, coarse.x_max, coarse.y_min, coarse.y_max],
                              rtol=0, atol=1e-12)
    if not same_domain:
        raise GridMismatch("grids cover different domains")
    if fine.nx % coarse.nx or fine.ny % coarse.ny:
        raise GridMismatch(f"cannot restrict {fine.nx}x{fine.ny} onto {coarse.nx}x{coarse.ny}: "
                           "cell counts are not integer multiples")
    rx, ry = fine.nx // coarse.nx, fine.ny // coarse.ny
    v = np.asarray(values, dtype=float)
    lead = v.shape[:-2]
    v = v.reshape(lead + (coarse.nx, rx, coarse.ny, ry))
    return v.mean(axis=(-3, -1))


def l1_error(values: np.ndarray, reference: np.ndarray, grid: Grid2D,
             reference_grid: Grid2D | None = None) -> float:
    """``sum |u - u_ref| dx dy`` over interior cells, restricting a finer reference."""
    ref = np.asarray(reference, dtype=float)
    if reference_grid is not None and reference_grid != grid:
        ref = restrict(ref, reference_grid, grid)
    values = np.asarray(values, dtype=float)
    if ref.shape != values.shape:
        raise GridMismatch(f"shape {values.shape} does not match reference {ref.shape}")
    return float(np.sum(np.abs(values - ref)) * grid.dx * grid.dy)


def convergence_rates(errors) -> list[float]:
    """``log2(e[i-1] / e[i])`` for successive halvings of the mesh size."""
    e = [float(v) for v in errors]
    if len(e) < 2:
        raise ConfigError("need at least two error values")
    if any(not v > 0 for v in e):
        raise NonPositiveError(f"errors must be positive, got {e}")
    return [math.log2(a / b) for a, b in zip(e[:-1], e[1:])]


def derived_quantity(q: np.ndarray, name: str, gamma: float = 1.4) -> np.ndarray:
    """Named quantity of a conserved Euler (or scalar) state."""
    if q.shape[0] == 1:
        if name != "u":
            raise ConfigError(f"scalar states only provide 'u', not {name!r}")
        return q[0]
    if name == "rho":
        return q[0]
    if name == "u1":
        return q[1] / q[0]
    if name == "u2":
        return q[2] / q[0]
    if name == "E":
        return q[3]
    if name == "p":
        return euler_pressure(q, gamma)
    raise ConfigError(f"unknown quantity {name!r}")


# Snapshots -----------------------------------------------------------------------------

SNAPSHOT_HEADER = "# nx ny x_min x_max y_min y_max t"


@dataclass
class Snapshot:
    grid: Grid2D
    t: float
    columns: dict[str, np.ndarray]   # each of shape (nx, ny)


def snapshot_columns(q: np.ndarray, gamma: float = 1.4) -> dict[str, np.ndarray]:
    if q.shape[0] == 1:
        return {"u": q[0]}
    return {name: derived_quantity(q, name, gamma) for name in ("rho", "u1", "u2", "E", "p")}


def write_snapshot(q: np.ndarray, grid: Grid2D, path, t: float, gamma: float = 1.4) -> Path:
    """Write interior states as CSV rows ordered by k, then j."""
    path = Path(path)
    cols = snapshot_columns(np.asarray(q, dtype=float), gamma)
    X, Y = grid.mesh()
    data = np.column_stack([X.T.ravel(), Y.T.ravel()] + [c.T.ravel() for c in cols.values()])
    meta = " ".join(repr(v) for v in (grid.nx, grid.ny, grid.x_min, grid.x_max,
                                      grid.y_min, grid.y_max, float(t)))
    header = f"{SNAPSHOT_HEADER[2:]}\n{meta}\n{','.join(['x', 'y'] + list(cols))}"
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header=header, comments="# ")
    return path


def read_snapshot(path) -> Snapshot:
    path = Path(path)
    with path.open() as fh:
        first = fh.readline().strip()
        meta = fh.readline().lstrip("#").split()
        names = fh.readline().lstrip("#").strip().split(",")
    if first != SNAPSHOT_HEADER or len(meta) != 7:
        raise ConfigError(f"{path} is not a snapshot file")
    nx, ny = int(meta[0]), int(meta[1])
    x0, x1, y0, y1, t = (float(v) for v in meta[2:])
    grid = make_grid(nx, ny, (x0, x1, y0, y1))
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    cols = {name: data[:, i].reshape(ny, nx).T.copy() for i, name in enumerate(names)}
    return Snapshot(grid, t, cols)


# Running ---------------------------------------------------------------------------------

@dataclass
class RunReport:
    config: ExperimentConfig
    grid: Grid2D
    t: float
    steps: int
    wall_time: float
    final: np.ndarray                 # full conserved state, interior
    deviation: np.ndarray             # evolved deviation, interior
    snapshots: list[tuple[float, np.ndarray]] = field(default_factory=list)
    files: list[Path] = field(default_factory=list)
    errors: dict[str, float] = field(default_factory=dict)
    monitor: object | None = None


def _output_times(cfg: ExperimentConfig) -> list[float]:
    times = sorted(set(float(t) for t in cfg.snapshot_times) | {float(cfg.t_end)})
    return times


def _snapshot_path(cfg: ExperimentConfig, t: float) -> Path:
    return Path(cfg.output_dir) / f"{cfg.experiment}_{cfg.nx}x{cfg.ny}_t{t:.6f}.csv"


def _next_dt(dev, setup, cfg, scfg):
    """Time step from the scheme's own local speeds; also returns reusable speeds."""
    if cfg.scheme == "fully_discrete":
        speeds = fully_discrete_speeds(dev, setup.stat, setup.model, scfg)
        return compute_dt(speeds, dev.grid, cfg.cfl), speeds
    rec = reconstruct_interfaces(dev, setup.stat, cfg.theta)
    return compute_dt(local_speeds(rec.full, setup.model, 0.0), dev.grid, cfg.cfl), None


def run_experiment(cfg: ExperimentConfig, write: bool | None = None,
                   keep_snapshots: bool = True) -> RunReport:
    """Initialize the named experiment and march it to ``t_end``.

    Snapshots at the requested times (and ``t_end``) are kept in the report
    and, with an ``output_dir``, written to CSV as soon as they are reached.
    """
    exp = EXPERIMENTS[cfg.experiment]
    grid = cfg.grid()
    scfg = cfg.scheme_config()
    setup = exp.build(cfg, grid)
    model, stat = setup.model, setup.stat
    write = bool(cfg.output_dir) if write is None else write
    if write:
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    if cfg.monitor and (model.n_comp != 1 or cfg.scheme != "semi_discrete"):
        raise ConfigError("monitor needs a scalar model and the semi-discrete scheme")

    dev = StateField.from_interior(grid, setup.initial - stat.cells(grid)[(slice(None),) + grid.interior])
    fill_ghosts(dev, scfg.bc, model)
    report = RunReport(cfg, grid, 0.0, 0, 0.0, setup.initial, dev.interior.copy())
    maxima, cfls = [float(np.max(dev.interior))], []
    qt = stat.cells(grid)[(slice(None),) + grid.interior]

    def emit(t):
        full = dev.interior + qt
        if keep_snapshots:
            report.snapshots.append((t, full.copy()))
        if write:
            report.files.append(write_snapshot(full, grid, _snapshot_path(cfg, t), t,
                                               getattr(model, "gamma", 1.4)))

    start = time.perf_counter()
    t = 0.0
    steps = 0
    limit = cfg.max_steps or None
    try:
        for stop in _output_times(cfg):
            while t < stop and (limit is None or steps < limit):
                dt, speeds = _next_dt(dev, setup, cfg, scfg)
                dt = min(dt, stop - t)
                if cfg.monitor:
                    cfls.append(cfl_report(dev, stat, model, dt, cfg.theta))
                if cfg.scheme == "fully_discrete":
                    dev = step_fully_discrete(dev, stat, model, scfg, dt, speeds)
                else:
                    dev = step_semi_discrete(dev, stat, model, scfg, dt)
                t = t + dt if t + dt < stop else stop
                steps += 1
                if cfg.monitor:
                    maxima.append(float(np.max(dev.interior)))
            if limit is not None and steps >= limit and t < stop:
                break
            emit(t)
    except SolverError as exc:
        raise type(exc)(f"{cfg.experiment}: step {steps + 1} at t={t:.6g}: {exc}") from exc
    finally:
        report.wall_time = time.perf_counter() - start
        report.steps = steps
        report.t = t
    if limit is not None and steps >= limit and (not report.snapshots or report.snapshots[-1][0] != t):
        emit(t)
    report.final = dev.interior + qt
    report.deviation = dev.interior.copy()
    if setup.exact is not None:
        report.errors["max_abs_vs_exact"] = float(np.max(np.abs(report.final - setup.exact)))
    if cfg.monitor:
        report.monitor = max_principle_monitor([np.array(m) for m in maxima], cfls,
                                               "forward_euler" if cfg.integrator == "forward_euler"
                                               else cfg.integrator)
    return report


# Convergence -------------------------------------------------------------------------------

@dataclass
class ConvergenceTable:
    levels: list[int]
    quantities: list[str]
    errors: dict[str, list[float]]
    rates: dict[str, list[float]]
    reference_level: int
    reports: list[RunReport] = field(default_factory=list)

    def rows(self) -> list[list]:
        out = []
        for i, n in enumerate(self.levels):
            row = [n]
            for q in self.quantities:
                row.append(self.errors[q][i])
                row.append(self.rates[q][i - 1] if i > 0 else None)
            out.append(row)
        return out

    def format(self) -> str:
        head = ["N"]
        for q in self.quantities:
            head += [f"L1({q})", "rate"]
        lines = ["  ".join(f"{h:>11}" for h in head)]
        for row in self.rows():
            cells = [f"{row[0]:>11d}"]
            for i, v in enumerate(row[1:]):
                if v is None:
                    cells.append(f"{'-':>11}")
                elif i % 2 == 0:
                    cells.append(f"{v:11.3e}")
                else:
                    cells.append(f"{v:11.2f}")
            lines.append("  ".join(cells))
        return "\n".join(lines)

    def write_csv(self, path) -> Path:
        path = Path(path)
        head = ["N"]
        for q in self.quantities:
            head += [f"err_{q}", f"rate_{q}"]
        with path.open("w") as fh:
            fh.write(",".join(head) + "\n")
            for row in self.rows():
                fh.write(",".join("" if v is None else repr(v) for v in row) + "\n")
        return path


def level_config(cfg: ExperimentConfig, n: int) -> ExperimentConfig:
    """The config at resolution level ``n`` (long axis only for quasi-1D runs)."""
    axis = EXPERIMENTS[cfg.experiment].long_axis
    if axis == "x":
        return cfg.with_overrides(nx=n, snapshot_times=(), output_dir="")
    if axis == "y":
        return cfg.with_overrides(ny=n, snapshot_times=(), output_dir="")
    return cfg.with_overrides(nx=n, ny=n, snapshot_times=(), output_dir="")


def run_convergence(cfg: ExperimentConfig, levels, quantities=None,
                    progress: Callable[[str], None] | None = None) -> ConvergenceTable:
    """Run every level and measure L1 errors against the finest one."""
    levels = [int(n) for n in levels]
    if len(levels) < 3:
        raise ConfigError("need at least two levels plus a reference level")
    if sorted(levels) != levels or len(set(levels)) != len(levels):
        raise ConfigError(f"levels must be strictly increasing, got {levels}")
    reports = []
    for n in levels:
        if progress:
            progress(f"running {cfg.experiment} at level {n}")
        reports.append(run_experiment(level_config(cfg, n), write=False, keep_snapshots=False))
    ref = reports[-1]
    gamma = cfg.gamma
    if quantities is None:
        quantities = ["u"] if ref.final.shape[0] == 1 else ["rho", "p", "E"]
    errors = {q: [] for q in quantities}
    for rep in reports[:-1]:
        for q in quantities:
            errors[q].append(l1_error(derived_quantity(rep.final, q, gamma),
                                      derived_quantity(ref.final, q, gamma), rep.grid, ref.grid))
    rates = {}
    for q in quantities:
        try:
            rates[q] = convergence_rates(errors[q])
        except NonPositiveError:
            rates[q] = [math.nan] * (len(errors[q]) - 1)
    return ConvergenceTable(levels[:-1], list(quantities), errors, rates, levels[-1], reports)
