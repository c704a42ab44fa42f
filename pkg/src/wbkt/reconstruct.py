"""MC-theta slope limiting and piecewise-linear reconstruction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import PointOutsideCell
from .grid import Grid2D, StateField


def minmod3(a, b, c):
    """Minmod of three arguments.

    Returns the argument of smallest magnitude when all three share a sign,
    zero otherwise.  Evaluated without division as
    ``max(min(a, b, c), 0) + min(max(a, b, c), 0)``.
    """
    a, b, c = np.asarray(a, dtype=float), np.asarray(b, dtype=float), np.asarray(c, dtype=float)
    lo = np.minimum(np.minimum(a, b), c)
    hi = np.maximum(np.maximum(a, b), c)
    out = np.maximum(lo, 0.0) + np.minimum(hi, 0.0)
    return out[()] if out.ndim == 0 else out


def limited_slope(u: np.ndarray, h: float, theta: float, axis: int) -> np.ndarray:
    """MC-theta slope of ``u`` along ``axis``, same shape as ``u``.

    The two outermost entries along ``axis`` lack a neighbor and are set to 0.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    n = u.shape[axis]
    if n < 3:
        return out
    lo = [slice(None)] * u.ndim
    mid = [slice(None)] * u.ndim
    hi = [slice(None)] * u.ndim
    lo[axis], mid[axis], hi[axis] = slice(0, n - 2), slice(1, n - 1), slice(2, n)
    um, u0, up = u[tuple(lo)], u[tuple(mid)], u[tuple(hi)]
    out[tuple(mid)] = minmod3(theta * (up - u0) / h, (up - um) / (2.0 * h), theta * (u0 - um) / h)
    return out


@dataclass
class SlopeField:
    """Limited x and y derivatives per cell, padded like the source field."""

    sx: np.ndarray
    sy: np.ndarray


@dataclass
class InterfaceStates:
    """One-sided edge-midpoint values of each cell's linear reconstruction."""

    east: np.ndarray
    west: np.ndarray
    north: np.ndarray
    south: np.ndarray


def mc_theta_slopes(field: StateField, theta: float = 1.5) -> SlopeField:
    """Componentwise MC-theta slopes of a ghost-filled field.

    Valid on every cell that has both neighbors, i.e. all but the outermost
    ghost ring.
    """
    if not 1.0 <= theta <= 2.0:
        raise ValueError(f"theta must lie in [1, 2], got {theta}")
    g = field.grid
    return SlopeField(limited_slope(field.data, g.dx, theta, axis=1),
                      limited_slope(field.data, g.dy, theta, axis=2))


def interface_states(field: StateField, slopes: SlopeField, grid: Grid2D | None = None) -> InterfaceStates:
    grid = grid or field.grid
    q = field.data
    hx = 0.5 * grid.dx * slopes.sx
    hy = 0.5 * grid.dy * slopes.sy
    return InterfaceStates(q + hx, q - hx, q + hy, q - hy)


def corner_point_values(field: StateField, slopes: SlopeField, grid: Grid2D | None,
                        j, k, x, y, check: bool = True) -> np.ndarray:
    """Evaluate the reconstruction of cell ``(j, k)`` at the point ``(x, y)``.

    ``j, k`` are signed cell indices (ghosts allowed) and may be arrays that
    broadcast with ``x, y``.  Returns shape ``(n_comp,) + broadcast shape``.
    """
    grid = grid or field.grid
    j = np.asarray(j)
    k = np.asarray(k)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xc = grid.x_min + (j + 0.5) * grid.dx
    yc = grid.y_min + (k + 0.5) * grid.dy
    ox, oy = x - xc, y - yc
    if check:
        tol = 1e-12 * max(grid.dx, grid.dy)
        bad = (np.abs(ox) > 0.5 * grid.dx + tol) | (np.abs(oy) > 0.5 * grid.dy + tol)
        if np.any(bad):
            raise PointOutsideCell(
                f"{np.count_nonzero(bad)} point(s) fall outside their owning cell")
    g = grid.ghost
    pj, pk = j + g, k + g
    return field.data[:, pj, pk] + ox * slopes.sx[:, pj, pk] + oy * slopes.sy[:, pj, pk]
