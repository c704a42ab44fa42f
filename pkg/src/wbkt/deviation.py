"""Shared pieces of the deviation formulation.

The solvers evolve ``dq = q - q_stat`` where ``q_stat`` is a known stationary
solution given analytically.  Fluxes act on the deviation through
``F(dq) = f(dq + q_stat) - f(q_stat)``, so ``F(0) == 0`` holds bit for bit and
a zero deviation is a fixed point of every update.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ConfigError
from .grid import BoundarySpec, Grid2D, StateField

SCHEMES = ("fully_discrete", "semi_discrete")
INTEGRATORS = ("forward_euler", "ssp_rk2")


@dataclass
class SchemeConfig:
    """Numerical parameters shared by both schemes."""

    theta: float = 1.5
    eps: float = 1e-8
    cfl: float = 0.45
    bc: BoundarySpec = field(default_factory=BoundarySpec)
    # fully-discrete projection: False drops the slopes on the fan subdomains
    projection_slopes: bool = True
    # what boundary subdomains use as outer neighbor: "mirror" or "duplicate"
    projection_boundary: str = "mirror"
    # semi-discrete: floor on a+ - a- when both speeds vanish but states differ
    speed_floor: float = 1e-12
    integrator: str = "forward_euler"

    def __post_init__(self):
        if not 1.0 <= self.theta <= 2.0:
            raise ConfigError(f"theta must lie in [1, 2], got {self.theta}")
        if self.eps < 0:
            raise ConfigError(f"eps must be nonnegative, got {self.eps}")
        if not 0.0 < self.cfl < 1.0:
            raise ConfigError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.speed_floor < 0:
            raise ConfigError(f"speed_floor must be nonnegative, got {self.speed_floor}")
        if self.projection_boundary not in ("mirror", "duplicate"):
            raise ConfigError(f"projection_boundary must be 'mirror' or 'duplicate', "
                              f"got {self.projection_boundary!r}")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"unknown integrator {self.integrator!r}; expected one of {INTEGRATORS}")


class StationaryState:
    """Analytic stationary solution ``q_stat(x, y)`` with per-grid caches.

    ``func`` maps coordinate arrays to conserved states of shape
    ``(n_comp,) + x.shape``.  ``func=None`` stands for the zero state, in which
    case the deviation is the state itself and ``f(q_stat)`` is never formed.
    """

    def __init__(self, func: Callable | None, n_comp: int, name: str = ""):
        self.func = func
        self.n_comp = n_comp
        self.name = name or ("none" if func is None else getattr(func, "__name__", "stationary"))
        self._cells: dict = {}

    @classmethod
    def zero(cls, n_comp: int) -> "StationaryState":
        return cls(None, n_comp, "none")

    @classmethod
    def constant(cls, value) -> "StationaryState":
        value = np.atleast_1d(np.asarray(value, dtype=float))

        def func(x, y):
            shape = np.broadcast_shapes(np.shape(x), np.shape(y))
            return value.reshape((-1,) + (1,) * len(shape)) * np.ones(shape)
        return cls(func, value.size, "constant")

    @property
    def is_zero(self) -> bool:
        return self.func is None

    def __repr__(self):
        return f"StationaryState({self.name})"

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape)
        if self.func is None:
            return np.zeros((self.n_comp,) + shape)
        out = np.asarray(self.func(x, y), dtype=float)
        return np.broadcast_to(out, (self.n_comp,) + shape)

    def cells(self, grid: Grid2D) -> np.ndarray:
        """Point values at all padded cell centers."""
        if grid not in self._cells:
            X, Y = grid.mesh(with_ghosts=True)
            self._cells[grid] = np.ascontiguousarray(self(X, Y))
        return self._cells[grid]

    def field(self, grid: Grid2D) -> StateField:
        return StateField(grid, self.cells(grid).copy())


def deviation_flux(model, dq: np.ndarray, q_stat: np.ndarray | None, axis,
                   f_stat: np.ndarray | None = None) -> np.ndarray:
    """``f(dq + q_stat) - f(q_stat)``; plain ``f(dq)`` when ``q_stat`` is None."""
    if q_stat is None:
        return model.flux(dq, axis)
    if f_stat is None:
        f_stat = model.flux(q_stat, axis)
    return model.flux(dq + q_stat, axis) - f_stat


def stat_values(stat: StationaryState | None, x, y) -> np.ndarray | None:
    if stat is None or stat.is_zero:
        return None
    return stat(x, y)


def full_state(dev: StateField, stat: StationaryState | None) -> StateField:
    """``q = dq + q_stat`` on every padded cell."""
    if stat is None or stat.is_zero:
        return dev.copy()
    return StateField(dev.grid, dev.data + stat.cells(dev.grid))
