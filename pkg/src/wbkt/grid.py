"""Structured 2D mesh with ghost layers and boundary filling.

Arrays are indexed ``data[component, j, k]`` with ``j`` running along x and
``k`` along y.  Interior cell ``(j, k)`` lives at ``data[:, j + ghost, k + ghost]``;
ghost cells carry signed offsets ``j = -1, -2, ...`` and ``j = nx, nx + 1, ...``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError

BOUNDARY_KINDS = ("outflow", "reflecting", "periodic")
SIDES = ("x_lo", "x_hi", "y_lo", "y_hi")


@dataclass(frozen=True)
class Grid2D:
    """Uniform Cartesian grid on ``[x_min, x_max] x [y_min, y_max]``."""

    nx: int
    ny: int
    x_min: float
    x_max: float
    y_min: float
    y_max: float
    ghost: int = 2

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        """Padded array shape ``(nx + 2*ghost, ny + 2*ghost)``."""
        return (self.nx + 2 * self.ghost, self.ny + 2 * self.ghost)

    @property
    def interior(self) -> tuple[slice, slice]:
        g = self.ghost
        return (slice(g, g + self.nx), slice(g, g + self.ny))

    def x_centers(self, with_ghosts: bool = False) -> np.ndarray:
        g = self.ghost if with_ghosts else 0
        j = np.arange(-g, self.nx + g)
        return self.x_min + (j + 0.5) * self.dx

    def y_centers(self, with_ghosts: bool = False) -> np.ndarray:
        g = self.ghost if with_ghosts else 0
        k = np.arange(-g, self.ny + g)
        return self.y_min + (k + 0.5) * self.dy

    def x_faces(self) -> np.ndarray:
        """Interface positions ``x_{j-1/2}`` for ``j = 0..nx``."""
        return self.x_min + np.arange(self.nx + 1) * self.dx

    def y_faces(self) -> np.ndarray:
        return self.y_min + np.arange(self.ny + 1) * self.dy

    def mesh(self, with_ghosts: bool = False) -> tuple[np.ndarray, np.ndarray]:
        """Cell-center coordinates as two ``(nx, ny)`` arrays (``ij`` indexing)."""
        return np.meshgrid(self.x_centers(with_ghosts), self.y_centers(with_ghosts),
                           indexing="ij")

    def cell_center(self, j: int, k: int) -> tuple[float, float]:
        return (self.x_min + (j + 0.5) * self.dx, self.y_min + (k + 0.5) * self.dy)


def make_grid(nx: int, ny: int, bounds: Sequence[float] = (0.0, 1.0, 0.0, 1.0),
              ghost: int = 2) -> Grid2D:
    """Build a :class:`Grid2D` from cell counts and ``(x_min, x_max, y_min, y_max)``."""
    if int(nx) != nx or int(ny) != ny or nx < 1 or ny < 1:
        raise ConfigError(f"cell counts must be positive integers, got nx={nx}, ny={ny}")
    if len(bounds) != 4:
        raise ConfigError(f"bounds must be (x_min, x_max, y_min, y_max), got {bounds!r}")
    x_min, x_max, y_min, y_max = (float(b) for b in bounds)
    if not all(np.isfinite([x_min, x_max, y_min, y_max])):
        raise ConfigError(f"bounds must be finite, got {bounds!r}")
    if not (x_max > x_min and y_max > y_min):
        raise ConfigError(f"degenerate domain {bounds!r}: need x_max > x_min and y_max > y_min")
    if int(ghost) != ghost or ghost < 2:
        raise ConfigError(f"ghost width must be an integer >= 2, got {ghost}")
    return Grid2D(int(nx), int(ny), x_min, x_max, y_min, y_max, int(ghost))


@dataclass
class StateField:
    """Cell data of ``n_comp`` components on a ghosted grid."""

    grid: Grid2D
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=float)
        if self.data.ndim == 2:
            self.data = self.data[None]
        if self.data.shape[1:] != self.grid.shape:
            raise ConfigError(
                f"field shape {self.data.shape[1:]} does not match padded grid shape {self.grid.shape}")

    @classmethod
    def zeros(cls, grid: Grid2D, n_comp: int) -> "StateField":
        return cls(grid, np.zeros((n_comp,) + grid.shape))

    @classmethod
    def from_interior(cls, grid: Grid2D, values: np.ndarray) -> "StateField":
        values = np.asarray(values, dtype=float)
        if values.ndim == 2:
            values = values[None]
        f = cls.zeros(grid, values.shape[0])
        f.interior[...] = values
        return f

    @property
    def n_comp(self) -> int:
        return self.data.shape[0]

    @property
    def interior(self) -> np.ndarray:
        """Writable view of the interior cells, shape ``(n_comp, nx, ny)``."""
        sx, sy = self.grid.interior
        return self.data[:, sx, sy]

    def copy(self) -> "StateField":
        return StateField(self.grid, self.data.copy())


@dataclass(frozen=True)
class BoundarySpec:
    """Boundary kind on each of the four sides."""

    x_lo: str = "outflow"
    x_hi: str = "outflow"
    y_lo: str = "outflow"
    y_hi: str = "outflow"

    def __post_init__(self):
        for side in SIDES:
            kind = getattr(self, side)
            if kind not in BOUNDARY_KINDS:
                raise ConfigError(f"unknown boundary kind {kind!r} on {side}; "
                                  f"expected one of {BOUNDARY_KINDS}")
        if (self.x_lo == "periodic") != (self.x_hi == "periodic"):
            raise ConfigError("periodic boundaries must be set on both x sides")
        if (self.y_lo == "periodic") != (self.y_hi == "periodic"):
            raise ConfigError("periodic boundaries must be set on both y sides")

    @classmethod
    def uniform(cls, kind: str) -> "BoundarySpec":
        return cls(kind, kind, kind, kind)

    @property
    def uses_reflecting(self) -> bool:
        return "reflecting" in (self.x_lo, self.x_hi, self.y_lo, self.y_hi)


def _fill_axis(a: np.ndarray, g: int, n: int, axis: int, lo: str, hi: str,
               flip: int | None) -> None:
    # a has shape (n_comp, Nx, Ny); axis is 1 (x) or 2 (y)
    def sl(start, stop, step=None):
        idx = [slice(None)] * 3
        idx[axis] = slice(start, stop, step)
        return tuple(idx)

    if lo == "periodic":
        lo_src = g + np.mod(np.arange(-g, 0), n)
        hi_src = g + np.mod(np.arange(n, n + g), n)
        a[sl(0, g)] = np.take(a, lo_src, axis=axis)
        a[sl(n + g, n + 2 * g)] = np.take(a, hi_src, axis=axis)
        return

    if lo == "outflow":
        a[sl(0, g)] = a[sl(g, g + 1)]
    else:
        a[sl(0, g)] = a[sl(2 * g - 1, g - 1, -1)]
        if flip is not None:
            idx = list(sl(0, g))
            idx[0] = flip
            a[tuple(idx)] *= -1.0

    if hi == "outflow":
        a[sl(n + g, n + 2 * g)] = a[sl(n + g - 1, n + g)]
    else:
        a[sl(n + g, n + 2 * g)] = a[sl(n + g - 1, n - 1 if n > 0 else None, -1)]
        if flip is not None:
            idx = list(sl(n + g, n + 2 * g))
            idx[0] = flip
            a[tuple(idx)] *= -1.0


def fill_ghosts(field: StateField, bc: BoundarySpec, model=None) -> StateField:
    """Fill ghost layers of ``field`` in place and return it.

    Outflow copies the nearest interior cell, reflecting mirrors the interior
    and negates the boundary-normal momentum, periodic wraps around.  The x
    sweep runs over interior rows first; the y sweep then covers full columns,
    so corner ghosts are filled consistently.
    """
    grid = field.grid
    g = grid.ghost
    if grid.nx < g and "reflecting" in (bc.x_lo, bc.x_hi):
        raise ConfigError(f"reflecting x boundary needs nx >= ghost ({g})")
    if grid.ny < g and "reflecting" in (bc.y_lo, bc.y_hi):
        raise ConfigError(f"reflecting y boundary needs ny >= ghost ({g})")
    flips = [None, None]
    if bc.uses_reflecting:
        if model is None or getattr(model, "normal_momentum", None) is None:
            raise ConfigError("reflecting boundaries need a model that names its momentum components")
        flips = [model.normal_momentum(0), model.normal_momentum(1)]
    a = field.data
    rows = slice(g, g + grid.ny)
    _fill_axis(a[:, :, rows], g, grid.nx, 1, bc.x_lo, bc.x_hi, flips[0])
    _fill_axis(a, g, grid.ny, 2, bc.y_lo, bc.y_hi, flips[1])
    return field
