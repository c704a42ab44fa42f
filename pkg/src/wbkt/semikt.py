"""Semi-discrete well-balanced central-upwind scheme for the deviation.

The ODE system is

    d(dq)_jk/dt = -(Hx_{j+1/2} - Hx_{j-1/2})/dx - (Hy_{k+1/2} - Hy_{k-1/2})/dy + S(dq_jk)

with central-upwind fluxes of the deviation fluxes ``F(dq) = f(dq + q_stat) - f(q_stat)``
and one-sided speeds from the full state.  The speed floor ``eps`` is 0 here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .deviation import SchemeConfig, StationaryState, deviation_flux
from .errors import ConfigError, DivisionByZeroSpeed, NonphysicalState
from .fullkt import SpeedField, local_speeds
from .grid import Grid2D, StateField, fill_ghosts
from .reconstruct import InterfaceStates, limited_slope

CFL_BOUND = 0.125


# Numerical fluxes ---------------------------------------------------------------

def _resolve_dead(dE, dW, a_plus, a_minus, floor):
    """Handle interfaces whose fan is empty (``a+ - a- < floor``).

    Returns adjusted speeds and a mask of interfaces where ``dE == dW`` and
    the flux collapses to ``F(dE)``.
    """
    width = a_plus - a_minus
    dead = width < floor if floor > 0 else width <= 0.0
    if not np.any(dead):
        return a_plus, a_minus, None
    same = np.all(dE == dW, axis=0) & dead
    differ = dead & ~same
    if np.any(differ):
        if floor == 0:
            idx = tuple(int(i) for i in np.argwhere(differ)[0])
            raise DivisionByZeroSpeed(
                f"a+ = a- = 0 at interface {idx} with differing states; set a positive speed_floor")
        a_plus = np.where(differ, 0.5 * floor, a_plus)
        a_minus = np.where(differ, -0.5 * floor, a_minus)
    a_plus = np.where(same, 1.0, a_plus)
    a_minus = np.where(same, -1.0, a_minus)
    return a_plus, a_minus, same


def central_upwind_flux(FE, FW, dE, dW, a_plus, a_minus):
    """``[a+ F(E) - a- F(W)]/(a+ - a-) + a+ a-/(a+ - a-) (W - E)``."""
    width = a_plus - a_minus
    return (a_plus * FE - a_minus * FW) / width + (a_plus * a_minus / width) * (dW - dE)


def numerical_flux(dE, dW, q_stat, a_plus, a_minus, model, axis, floor: float = 1e-12):
    """Central-upwind flux of the deviation across one family of interfaces.

    ``dE`` is the reconstructed deviation on the low side of the interface
    (east or north face of the left/lower cell), ``dW`` on the high side;
    ``q_stat`` holds the stationary state at the interface midpoints or is
    None for a zero stationary state.
    """
    dE = np.asarray(dE, dtype=float)
    dW = np.asarray(dW, dtype=float)
    a_plus, a_minus, same = _resolve_dead(dE, dW, np.asarray(a_plus, dtype=float),
                                          np.asarray(a_minus, dtype=float), floor)
    f_stat = None if q_stat is None else model.flux(q_stat, axis)
    FE = deviation_flux(model, dE, q_stat, axis, f_stat)
    FW = deviation_flux(model, dW, q_stat, axis, f_stat)
    H = central_upwind_flux(FE, FW, dE, dW, a_plus, a_minus)
    if same is not None:
        H = np.where(same, FE, H)
    return H


def numerical_flux_x(dE, dW, q_stat, a_plus, a_minus, model, floor: float = 1e-12):
    return numerical_flux(dE, dW, q_stat, a_plus, a_minus, model, 0, floor)


def numerical_flux_y(dN, dS, q_stat, b_plus, b_minus, model, floor: float = 1e-12):
    return numerical_flux(dN, dS, q_stat, b_plus, b_minus, model, 1, floor)


# Right-hand side -----------------------------------------------------------------

@dataclass
class Reconstruction:
    """Interface values of the deviation on the interior plus one ghost ring.

    ``dev`` holds the deviation edge values, ``full`` the same plus the
    stationary state at the edge midpoints; ``stat_x``/``stat_y`` are the
    stationary states at the x- and y-interfaces used by the fluxes.
    """

    dev: InterfaceStates
    full: InterfaceStates
    stat_x: np.ndarray | None
    stat_y: np.ndarray | None


def reconstruct_interfaces(dev: StateField, stat: StationaryState | None,
                           theta: float) -> Reconstruction:
    grid = dev.grid
    g = grid.ghost
    ring = (slice(None), slice(g - 1, g + grid.nx + 1), slice(g - 1, g + grid.ny + 1))
    q = dev.data[ring]
    sx = limited_slope(dev.data, grid.dx, theta, axis=1)[ring]
    sy = limited_slope(dev.data, grid.dy, theta, axis=2)[ring]
    hx, hy = 0.5 * grid.dx, 0.5 * grid.dy
    d = InterfaceStates(q + hx * sx, q - hx * sx, q + hy * sy, q - hy * sy)
    if stat is None or stat.is_zero:
        return Reconstruction(d, d, None, None)
    x = grid.x_min + (np.arange(-1, grid.nx + 1) + 0.5) * grid.dx
    y = grid.y_min + (np.arange(-1, grid.ny + 1) + 0.5) * grid.dy
    X, Y = np.meshgrid(x, y, indexing="ij")
    full = InterfaceStates(d.east + stat(X + hx, Y), d.west + stat(X - hx, Y),
                           d.north + stat(X, Y + hy), d.south + stat(X, Y - hy))
    # the x-interface between ring cells r and r+1 sits at the east face of r
    stat_x = stat(X[:-1, :] + hx, Y[:-1, :])
    stat_y = stat(X[:, :-1], Y[:, :-1] + hy)
    return Reconstruction(d, full, stat_x, stat_y)


@dataclass
class RhsField:
    """Time derivative of the interior deviation and the fluxes behind it.

    ``hx`` has shape ``(n_comp, nx+1, ny)`` (interfaces ``j-1/2``,
    ``j = 0..nx``), ``hy`` shape ``(n_comp, nx, ny+1)``.
    """

    values: np.ndarray
    hx: np.ndarray
    hy: np.ndarray
    speeds: SpeedField


def semi_discrete_rhs(dev: StateField, stat: StationaryState | None, model,
                      config: SchemeConfig) -> RhsField:
    """Evaluate the semi-discrete right-hand side on a ghost-filled deviation."""
    grid = dev.grid
    rec = reconstruct_interfaces(dev, stat, config.theta)
    ring_speeds = local_speeds(rec.full, model, 0.0)
    # keep interfaces adjacent to interior cells only
    ap, am = ring_speeds.a_plus[:, 1:-1], ring_speeds.a_minus[:, 1:-1]
    bp, bm = ring_speeds.b_plus[1:-1, :], ring_speeds.b_minus[1:-1, :]
    d = rec.dev
    sx_ = None if rec.stat_x is None else rec.stat_x[:, :, 1:-1]
    sy_ = None if rec.stat_y is None else rec.stat_y[:, 1:-1, :]
    hx = numerical_flux(d.east[:, :-1, 1:-1], d.west[:, 1:, 1:-1], sx_, ap, am, model, 0,
                        config.speed_floor)
    hy = numerical_flux(d.north[:, 1:-1, :-1], d.south[:, 1:-1, 1:], sy_, bp, bm, model, 1,
                        config.speed_floor)
    rhs = -(hx[:, 1:, :] - hx[:, :-1, :]) / grid.dx - (hy[:, :, 1:] - hy[:, :, :-1]) / grid.dy
    if model.has_source:
        X, Y = grid.mesh()
        rhs = rhs + model.source(dev.interior, X, Y)
    return RhsField(rhs, hx, hy, SpeedField(ap, am, bp, bm))


# CFL control ---------------------------------------------------------------------

@dataclass
class CflReport:
    """Courant numbers against the maximum-principle bound ``1/8``."""

    lam: float
    mu: float
    max_fx: float
    max_gy: float
    satisfied: bool

    @classmethod
    def from_speeds(cls, max_fx: float, max_gy: float, dx: float, dy: float, dt: float) -> "CflReport":
        lam, mu = dt / dx, dt / dy
        worst = max(lam * max_fx, mu * max_gy)
        return cls(lam, mu, float(max_fx), float(max_gy), bool(worst <= CFL_BOUND + 1e-14))

    @property
    def courant(self) -> float:
        return max(self.lam * self.max_fx, self.mu * self.max_gy)


def max_wave_speeds(dev: StateField, stat: StationaryState | None, model,
                    theta: float = 1.5) -> tuple[float, float]:
    """Largest ``|f'|`` and ``|g'|`` over all reconstructed full-state edge values."""
    rec = reconstruct_interfaces(dev, stat, theta)
    inner = (slice(None), slice(1, -1), slice(1, -1))
    fx = 0.0
    for q in (rec.full.east[inner], rec.full.west[inner]):
        lo, hi = model.speed_bounds(q, 0)
        fx = max(fx, float(np.max(np.abs(lo))), float(np.max(np.abs(hi))))
    gy = 0.0
    for q in (rec.full.north[inner], rec.full.south[inner]):
        lo, hi = model.speed_bounds(q, 1)
        gy = max(gy, float(np.max(np.abs(lo))), float(np.max(np.abs(hi))))
    return fx, gy


def cfl_report(dev: StateField, stat: StationaryState | None, model, dt: float,
               theta: float = 1.5) -> CflReport:
    fx, gy = max_wave_speeds(dev, stat, model, theta)
    return CflReport.from_speeds(fx, gy, dev.grid.dx, dev.grid.dy, dt)


def semi_discrete_dt(speeds: SpeedField, grid: Grid2D, cfl: float) -> float:
    """``cfl * min(dx/max(a+, -a-), dy/max(b+, -b-))``; ``inf`` if nothing moves."""
    ax, by = speeds.max_speeds()
    cands = [grid.dx / ax if ax > 0 else np.inf, grid.dy / by if by > 0 else np.inf]
    return cfl * min(cands)


# Time integration ----------------------------------------------------------------

@dataclass
class Trajectory:
    """Result of :func:`integrate`."""

    final: StateField
    t: float
    steps: int
    method: str
    times: list[float] = field(default_factory=list)
    states: list[np.ndarray] = field(default_factory=list)
    cfl: list[CflReport] = field(default_factory=list)


def _euler_stage(dev: StateField, stat, model, config, dt) -> tuple[StateField, RhsField]:
    r = semi_discrete_rhs(dev, stat, model, config)
    out = dev.copy()
    out.interior[...] = dev.interior + dt * r.values
    fill_ghosts(out, config.bc, model)
    return out, r


def step_semi_discrete(dev: StateField, stat: StationaryState | None, model,
                       config: SchemeConfig, dt: float, method: str | None = None) -> StateField:
    """One forward-Euler or SSP-RK2 (Heun) step of a ghost-filled deviation."""
    method = method or config.integrator
    if method == "forward_euler":
        return _euler_stage(dev, stat, model, config, dt)[0]
    if method == "ssp_rk2":
        q1, _ = _euler_stage(dev, stat, model, config, dt)
        q2, _ = _euler_stage(q1, stat, model, config, dt)
        out = dev.copy()
        out.interior[...] = 0.5 * (dev.interior + q2.interior)
        return fill_ghosts(out, config.bc, model)
    raise ConfigError(f"unknown integrator {method!r}")


def integrate(dev0: StateField, stat: StationaryState | None, model, config: SchemeConfig,
              t_end: float, method: str | None = None, record: bool = False,
              dt_fixed: float | None = None, max_steps: int | None = None,
              monitor_cfl: bool = False) -> Trajectory:
    """March the semi-discrete system to ``t_end`` (last step clipped).

    ``dt`` comes from :func:`semi_discrete_dt` with ``config.cfl`` unless
    ``dt_fixed`` is given.  With ``record`` every interior state is kept,
    starting with the initial one.  ``max_steps`` stops early.
    """
    if t_end < 0:
        raise ConfigError(f"t_end must be nonnegative, got {t_end}")
    method = method or config.integrator
    if method not in ("forward_euler", "ssp_rk2"):
        raise ConfigError(f"unknown integrator {method!r}")
    dev = fill_ghosts(dev0.copy(), config.bc, model)
    traj = Trajectory(dev, 0.0, 0, method)
    if record:
        traj.times.append(0.0)
        traj.states.append(dev.interior.copy())
    t = 0.0
    while t < t_end and (max_steps is None or traj.steps < max_steps):
        if dt_fixed is not None:
            dt = dt_fixed
        else:
            rec = reconstruct_interfaces(dev, stat, config.theta)
            dt = semi_discrete_dt(local_speeds(rec.full, model, 0.0), dev.grid, config.cfl)
        dt = min(dt, t_end - t)
        if monitor_cfl:
            traj.cfl.append(cfl_report(dev, stat, model, dt, config.theta))
        try:
            dev = step_semi_discrete(dev, stat, model, config, dt, method)
        except NonphysicalState as exc:
            raise NonphysicalState(f"semi-discrete step {traj.steps + 1} at t={t:.6g}: {exc}") from exc
        t = t + dt if t + dt < t_end else t_end
        traj.steps += 1
        if record:
            traj.times.append(t)
            traj.states.append(dev.interior.copy())
    traj.final, traj.t = dev, t
    return traj


# Maximum principle -----------------------------------------------------------------

@dataclass
class MaxPrincipleReport:
    steps: int
    violations: list[tuple[int, float, float]]
    certified: bool
    reason: str = ""

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def first_violation(self):
        return self.violations[0] if self.violations else None


def max_principle_monitor(trajectory, cfl: list[CflReport] | None = None,
                          method: str = "forward_euler", tol: float | None = None) -> MaxPrincipleReport:
    """Check that ``max dq`` never increases along a scalar trajectory.

    ``trajectory`` is a :class:`Trajectory` or a sequence of arrays.  A
    violation is an increase beyond ``tol`` (default: a few ulps of the
    running maximum) and is recorded as ``(step, old_max, new_max)``.  The
    report is certified only for forward Euler runs whose steps all satisfy
    the 1/8 condition.
    """
    if isinstance(trajectory, Trajectory):
        states = trajectory.states
        cfl = trajectory.cfl if cfl is None else cfl
        method = trajectory.method
    else:
        states = list(trajectory)
    violations = []
    prev = None
    for n, s in enumerate(states):
        m = float(np.max(s))
        if prev is not None:
            bound = tol if tol is not None else 4.0 * np.finfo(float).eps * max(1.0, abs(prev))
            if m > prev + bound:
                violations.append((n, prev, m))
        prev = m
    reason = ""
    if method != "forward_euler":
        reason = f"the maximum principle is only established for forward Euler, not {method}"
    elif cfl is None or len(cfl) < len(states) - 1:
        reason = "no CFL reports for every step"
    elif not all(c.satisfied for c in cfl):
        reason = "a step exceeded the 1/8 CFL bound"
    return MaxPrincipleReport(max(len(states) - 1, 0), violations,
                              certified=not reason and not violations, reason=reason)


def _ratio(dF, dq, deriv):
    ok = dq != 0
    return np.where(ok, dF / np.where(ok, dq, 1.0), deriv)


def convex_combination_step(dev: StateField, model, config: SchemeConfig, dt: float):
    """Forward-Euler step of a homogeneous scalar law written as a combination
    of the six reconstructed edge values around each cell.

    Returns ``(new_interior, coefficients)`` where ``coefficients`` maps
    ``"Wp", "E", "W", "Em", "Sp", "N", "S", "Nm"`` to coefficient arrays; they
    sum to one in every cell.  Flux ratios ``dF/dq`` over zero differences
    fall back to ``f'`` at the shared value.
    """
    if dev.n_comp != 1 or model.has_source:
        raise ConfigError("the convex-combination form applies to homogeneous scalar laws")
    grid = dev.grid
    rec = reconstruct_interfaces(dev, None, config.theta)
    sp = local_speeds(rec.full, model, 0.0)
    d = rec.dev
    i = (slice(None), slice(1, -1), slice(1, -1))
    E, W, N, S = d.east[i][0], d.west[i][0], d.north[i][0], d.south[i][0]
    Em, Wp = d.east[0, :-2, 1:-1], d.west[0, 2:, 1:-1]
    Nm, Sp = d.north[0, 1:-1, :-2], d.south[0, 1:-1, 2:]
    ap, am = sp.a_plus[:, 1:-1], sp.a_minus[:, 1:-1]
    bp, bm = sp.b_plus[1:-1, :], sp.b_minus[1:-1, :]
    ap_r, am_r, ap_l, am_l = ap[1:], am[1:], ap[:-1], am[:-1]
    bp_t, bm_t, bp_b, bm_b = bp[:, 1:], bm[:, 1:], bp[:, :-1], bm[:, :-1]

    def f(u, axis):
        return model.flux(u[None], axis)[0]

    def fp(u, axis):
        return model.speed_bounds(u[None], axis)[1]

    lam, mu = dt / grid.dx, dt / grid.dy
    r_r = _ratio(f(Wp, 0) - f(E, 0), Wp - E, fp(0.5 * (Wp + E), 0))
    r_c = _ratio(f(E, 0) - f(W, 0), E - W, fp(0.5 * (E + W), 0))
    r_l = _ratio(f(W, 0) - f(Em, 0), W - Em, fp(0.5 * (W + Em), 0))
    s_t = _ratio(f(Sp, 1) - f(N, 1), Sp - N, fp(0.5 * (Sp + N), 1))
    s_c = _ratio(f(N, 1) - f(S, 1), N - S, fp(0.5 * (N + S), 1))
    s_b = _ratio(f(S, 1) - f(Nm, 1), S - Nm, fp(0.5 * (S + Nm), 1))
    dr, dl = ap_r - am_r, ap_l - am_l
    dtp, dbt = bp_t - bm_t, bp_b - bm_b
    coef = {
        "Wp": lam * (am_r / dr * r_r - ap_r * am_r / dr),
        "E": 0.25 - lam * (am_r / dr * r_r + r_c - ap_r * am_r / dr),
        "W": 0.25 + lam * (r_c - ap_l / dl * r_l + ap_l * am_l / dl),
        "Em": lam * (ap_l / dl * r_l - ap_l * am_l / dl),
        "Sp": mu * (bm_t / dtp * s_t - bp_t * bm_t / dtp),
        "N": 0.25 - mu * (bm_t / dtp * s_t + s_c - bp_t * bm_t / dtp),
        "S": 0.25 + mu * (s_c - bp_b / dbt * s_b + bp_b * bm_b / dbt),
        "Nm": mu * (bp_b / dbt * s_b - bp_b * bm_b / dbt),
    }
    vals = {"Wp": Wp, "E": E, "W": W, "Em": Em, "Sp": Sp, "N": N, "S": S, "Nm": Nm}
    new = sum(coef[k] * vals[k] for k in coef)
    return new[None], coef


# Stationary residual ---------------------------------------------------------------

def stationary_residual(stat: StationaryState, model, config: SchemeConfig, grid: Grid2D,
                        form: str = "flux") -> np.ndarray:
    """Local truncation error of the scheme at a stationary state.

    ``form="flux"`` applies the numerical fluxes to the point values of
    ``q_stat`` as if they were ordinary cell data (source ignored), so a
    hydrostatic ``q_stat`` leaves an O(1) flux imbalance.  ``form="deviation"``
    evaluates the deviation scheme at ``dq = 0``, which vanishes identically.
    """
    if form == "flux":
        q = StateField(grid, stat.cells(grid).copy())
        homogeneous = _Homogeneous(model)
        return semi_discrete_rhs(q, None, homogeneous, config).values
    if form == "deviation":
        dev = StateField.zeros(grid, stat.n_comp)
        return semi_discrete_rhs(dev, stat, model, config).values
    raise ConfigError(f"form must be 'flux' or 'deviation', got {form!r}")


class _Homogeneous:
    """View of a model with its source switched off."""

    has_source = False

    def __init__(self, model):
        self._m = model

    def __getattr__(self, name):
        return getattr(self._m, name)
