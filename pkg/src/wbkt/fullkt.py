"""Fully-discrete well-balanced central scheme on quadrilateral Riemann-fan subdomains.

One step evolves the deviation ``dq`` in three passes:

1. reconstruct ``dq`` cellwise with MC-theta slopes and estimate one-sided
   local speeds from the *full* state ``dq + q_stat``;
2. split every cell into nine pieces along the fan vertices, integrate the
   deviation balance law exactly in space (midpoint in time) over the
   central, side and corner subdomains;
3. project the subdomain averages back onto the uniform cells using
   piecewise-linear reconstructions on the unsmooth subdomains.

Index conventions
-----------------
Grid nodes ``(i, l)``, ``i = 0..nx``, ``l = 0..ny``, sit at
``(x_min + i*dx, y_min + l*dy)``.  Each node carries four fan vertices
``ll, lr, ul, ur`` at offsets ``(oxL|oxR, oyB|oyT)``.  The "ring" block is the
interior plus one ghost layer; ring index ``r`` equals the cell index plus 1.
Side subdomains across vertical lines are ``sidex[i, k]`` (``i = 0..nx``),
across horizontal lines ``sidey[j, l]`` (``l = 0..ny``), corners
``corner[i, l]`` and centers ``central[j, k]``.

Geometry is kept in coordinates local to each subdomain's reference point
(node, edge midpoint or cell center), so pieces of width ``eps*dt`` keep full
relative precision.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .deviation import SchemeConfig, StationaryState, deviation_flux
from .errors import DegenerateFan, NonphysicalState
from .geometry import clip_moments, polygon_area_centroid
from .grid import Grid2D, StateField, fill_ghosts
from .reconstruct import InterfaceStates, limited_slope, minmod3

KINDS = ("central", "sidex", "sidey", "corner")


# Local speeds ---------------------------------------------------------------

@dataclass
class SpeedField:
    """One-sided local speeds.

    ``a_plus``/``a_minus`` live on the x-interfaces between neighboring
    cells of the block they were computed from, shape ``(nbx - 1, nby)``;
    ``b_plus``/``b_minus`` on y-interfaces, shape ``(nbx, nby - 1)``.
    """

    a_plus: np.ndarray
    a_minus: np.ndarray
    b_plus: np.ndarray
    b_minus: np.ndarray

    def max_speeds(self) -> tuple[float, float]:
        ax = max(float(np.max(self.a_plus)), float(np.max(-self.a_minus)))
        by = max(float(np.max(self.b_plus)), float(np.max(-self.b_minus)))
        return ax, by


def local_speeds(iface: InterfaceStates, model, eps: float = 1e-8) -> SpeedField:
    """One-sided speeds from full-state interface values of a block of cells.

    ``a+ = max(lambda_max(left), lambda_max(right), eps)`` and
    ``a- = min(lambda_min(left), lambda_min(right), -eps)`` on every interior
    interface of the block; ``b`` likewise along y.
    """
    west_lo, west_hi = model.speed_bounds(iface.east[:, :-1, :], 0)
    east_lo, east_hi = model.speed_bounds(iface.west[:, 1:, :], 0)
    a_plus = np.maximum(np.maximum(west_hi, east_hi), eps)
    a_minus = np.minimum(np.minimum(west_lo, east_lo), -eps)
    south_lo, south_hi = model.speed_bounds(iface.north[:, :, :-1], 1)
    north_lo, north_hi = model.speed_bounds(iface.south[:, :, 1:], 1)
    b_plus = np.maximum(np.maximum(south_hi, north_hi), eps)
    b_minus = np.minimum(np.minimum(south_lo, north_lo), -eps)
    return SpeedField(a_plus, a_minus, b_plus, b_minus)


def _ring(grid: Grid2D) -> tuple[slice, slice, slice]:
    g = grid.ghost
    return (slice(None), slice(g - 1, g + grid.nx + 1), slice(g - 1, g + grid.ny + 1))


def _ring_coords(grid: Grid2D) -> tuple[np.ndarray, np.ndarray]:
    x = grid.x_min + (np.arange(-1, grid.nx + 1) + 0.5) * grid.dx
    y = grid.y_min + (np.arange(-1, grid.ny + 1) + 0.5) * grid.dy
    return np.meshgrid(x, y, indexing="ij")


def full_interface_states(q: np.ndarray, sx: np.ndarray, sy: np.ndarray, grid: Grid2D,
                          xc: np.ndarray, yc: np.ndarray,
                          stat: StationaryState | None) -> InterfaceStates:
    """Edge-midpoint values of ``dq`` plus the analytic ``q_stat`` at the same points."""
    hx, hy = 0.5 * grid.dx, 0.5 * grid.dy
    east, west = q + hx * sx, q - hx * sx
    north, south = q + hy * sy, q - hy * sy
    if stat is not None and not stat.is_zero:
        east = east + stat(xc + hx, yc)
        west = west + stat(xc - hx, yc)
        north = north + stat(xc, yc + hy)
        south = south + stat(xc, yc - hy)
    return InterfaceStates(east, west, north, south)


# Predictor -------------------------------------------------------------------

@dataclass
class Predictor:
    """Cellwise linear reconstruction plus the half-step drift on the ring block.

    ``values`` evaluates ``Q`` of the owning cell at an offset from its
    center; ``midpoint`` adds ``-(dt/2)(F_x + G_y) + (dt/2) S(Q)``.
    """

    grid: Grid2D
    model: object
    dt: float
    q: np.ndarray
    sx: np.ndarray
    sy: np.ndarray
    drift: np.ndarray

    def values(self, sel, ox, oy) -> np.ndarray:
        return self.q[sel] + ox * self.sx[sel] + oy * self.sy[sel]

    def midpoint(self, sel, ox, oy, x, y) -> np.ndarray:
        Q = self.values(sel, ox, oy)
        out = Q + self.drift[sel]
        if self.model.has_source:
            out = out + 0.5 * self.dt * self.model.source(Q, x, y)
        return out


def predictor_midpoint(dev: StateField, stat: StationaryState | None, model, dt: float,
                       theta: float = 1.5) -> Predictor:
    """Build the half-step predictor from a ghost-filled deviation field.

    Flux slopes are MC-theta limited differences of the cellwise deviation
    fluxes ``F = f(dq + q_stat) - f(q_stat)``, shared by every point of a cell.
    """
    grid = dev.grid
    ring = _ring(grid)
    qt = None if stat is None or stat.is_zero else stat.cells(grid)
    sx = limited_slope(dev.data, grid.dx, theta, axis=1)[ring]
    sy = limited_slope(dev.data, grid.dy, theta, axis=2)[ring]
    F = deviation_flux(model, dev.data, qt, 0)
    G = deviation_flux(model, dev.data, qt, 1)
    Fx = limited_slope(F, grid.dx, theta, axis=1)[ring]
    Gy = limited_slope(G, grid.dy, theta, axis=2)[ring]
    return Predictor(grid, model, float(dt), dev.data[ring], sx, sy, -0.5 * dt * (Fx + Gy))


# Fan geometry ----------------------------------------------------------------

@dataclass
class FanVertices:
    """Offsets of the four fan vertices of every node, shape ``(nx+1, ny+1)``."""

    grid: Grid2D
    dt: float
    oxL: np.ndarray
    oxR: np.ndarray
    oyB: np.ndarray
    oyT: np.ndarray

    def node_coords(self) -> tuple[np.ndarray, np.ndarray]:
        g = self.grid
        return np.meshgrid(g.x_faces(), g.y_faces(), indexing="ij")

    def absolute(self) -> dict[str, tuple[np.ndarray, np.ndarray]]:
        """Global coordinates of the ``ll, lr, ul, ur`` vertices of every node."""
        X, Y = self.node_coords()
        return {"ll": (X + self.oxL, Y + self.oyB), "lr": (X + self.oxR, Y + self.oyB),
                "ul": (X + self.oxL, Y + self.oyT), "ur": (X + self.oxR, Y + self.oyT)}


def fan_vertices(speeds: SpeedField, dt: float, grid: Grid2D) -> FanVertices:
    """Fan vertices from ring-block speeds.

    ``speeds.a_*`` must have shape ``(nx+1, ny+2)`` and ``speeds.b_*`` shape
    ``(nx+2, ny+1)``, as produced from the ring block.
    """
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    nx, ny = grid.nx, grid.ny
    if speeds.a_plus.shape != (nx + 1, ny + 2) or speeds.b_plus.shape != (nx + 2, ny + 1):
        raise ValueError("speed arrays do not match the ring block of the grid")
    oxL = dt * np.minimum(speeds.a_minus[:, :-1], speeds.a_minus[:, 1:])
    oxR = dt * np.maximum(speeds.a_plus[:, :-1], speeds.a_plus[:, 1:])
    oyB = dt * np.minimum(speeds.b_minus[:-1, :], speeds.b_minus[1:, :])
    oyT = dt * np.maximum(speeds.b_plus[:-1, :], speeds.b_plus[1:, :])
    dx, dy = grid.dx, grid.dy
    if dt > 0:
        if max(np.max(oxR), np.max(-oxL)) >= dx or max(np.max(oyT), np.max(-oyB)) >= dy:
            raise DegenerateFan("a fan vertex leaves its owning cell; dt violates the CFL limit")
        widths = (dx + oxL[1:, :] - oxR[:-1, :])
        heights = (dy + oyB[:, 1:] - oyT[:, :-1])
        if np.min(widths) <= 0 or np.min(heights) <= 0:
            raise DegenerateFan(f"central subdomains collapse (min width {np.min(widths):.3e}, "
                                f"min height {np.min(heights):.3e}); dt violates the CFL limit")
    return FanVertices(grid, float(dt), oxL, oxR, oyB, oyT)


@dataclass
class Piece:
    """One overlap polygon ``C`` of a subdomain with a single cell.

    ``area, cx, cy`` are in the subdomain's local frame; ``owner`` selects
    the owning cell on the ring block and ``shift`` converts local
    coordinates to offsets from the owner's center.
    """

    name: str
    area: np.ndarray
    cx: np.ndarray
    cy: np.ndarray
    owner: tuple
    shift: tuple[float, float]


@dataclass
class Subdomains:
    """All subdomains of one kind with their pieces and totals."""

    kind: str
    origin_x: np.ndarray
    origin_y: np.ndarray
    pieces: list[Piece]
    area: np.ndarray
    cx: np.ndarray
    cy: np.ndarray

    @property
    def centroid_x(self) -> np.ndarray:
        return self.origin_x + self.cx

    @property
    def centroid_y(self) -> np.ndarray:
        return self.origin_y + self.cy

    def piece(self, name: str) -> Piece:
        for p in self.pieces:
            if p.name == name:
                return p
        raise KeyError(name)


@dataclass
class FanGeometry:
    vertices: FanVertices
    central: Subdomains
    sidex: Subdomains
    sidey: Subdomains
    corner: Subdomains

    @property
    def grid(self) -> Grid2D:
        return self.vertices.grid

    def kinds(self) -> dict[str, Subdomains]:
        return {k: getattr(self, k) for k in KINDS}

    def cell_pieces(self) -> dict[str, np.ndarray]:
        """Areas of the nine pieces of every cell, each of shape ``(nx, ny)``."""
        return {
            "C": self.central.area,
            "E": self.sidex.piece("left").area[1:, :],
            "W": self.sidex.piece("right").area[:-1, :],
            "N": self.sidey.piece("lower").area[:, 1:],
            "S": self.sidey.piece("upper").area[:, :-1],
            "NE": self.corner.piece("ll").area[1:, 1:],
            "NW": self.corner.piece("lr").area[:-1, 1:],
            "SE": self.corner.piece("ul").area[1:, :-1],
            "SW": self.corner.piece("ur").area[:-1, :-1],
        }


def _sel(i0, i1, k0, k1):
    return (slice(None), slice(i0, i1), slice(k0, k1))


def _clip_pieces(px, py, cuts):
    """Area and centroid of ``poly`` cut by each list of half-planes in ``cuts``."""
    return [clip_moments(px, py, planes) for planes in cuts]


def _subdomains(kind, ox, oy, pieces_spec, px, py):
    cuts = [spec[1] for spec in pieces_spec]
    pieces = []
    for (name, _, owner, shift), (area, cx, cy) in zip(pieces_spec, _clip_pieces(px, py, cuts)):
        area = np.maximum(area, 0.0)
        pieces.append(Piece(name, area, cx, cy, owner, shift))
    total = sum(p.area for p in pieces)
    safe = np.where(total > 0, total, 1.0)
    cx = np.where(total > 0, sum(p.area * p.cx for p in pieces) / safe, 0.0)
    cy = np.where(total > 0, sum(p.area * p.cy for p in pieces) / safe, 0.0)
    return Subdomains(kind, ox, oy, pieces, total, cx, cy)


def build_geometry(v: FanVertices) -> FanGeometry:
    """Cut every subdomain along grid lines into its per-cell pieces."""
    g = v.grid
    nx, ny, dx, dy = g.nx, g.ny, g.dx, g.dy
    hx, hy = 0.5 * dx, 0.5 * dy
    xf, yf = g.x_faces(), g.y_faces()
    xc, yc = g.x_centers(), g.y_centers()
    oxL, oxR, oyB, oyT = v.oxL, v.oxR, v.oyB, v.oyT
    left, right, below, above = (1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)

    # central (j, k), local to the cell center
    px = np.stack([-hx + oxR[:-1, :-1], hx + oxL[1:, :-1], hx + oxL[1:, 1:], -hx + oxR[:-1, 1:]])
    py = np.stack([-hy + oyT[:-1, :-1], -hy + oyT[1:, :-1], hy + oyB[1:, 1:], hy + oyB[:-1, 1:]])
    area, cx, cy = polygon_area_centroid(px, py)
    if np.any(area <= 0) and v.dt > 0:
        raise DegenerateFan("a central subdomain has nonpositive area; dt violates the CFL limit")
    X, Y = np.meshgrid(xc, yc, indexing="ij")
    central = Subdomains("central", X, Y,
                         [Piece("C", np.maximum(area, 0.0), cx, cy, _sel(1, nx + 1, 1, ny + 1), (0.0, 0.0))],
                         np.maximum(area, 0.0), cx, cy)

    # sidex (i, k) straddles x = x_i; local to (x_i, y_k)
    px = np.stack([oxL[:, :-1], oxR[:, :-1], oxR[:, 1:], oxL[:, 1:]])
    py = np.stack([-hy + oyT[:, :-1], -hy + oyT[:, :-1], hy + oyB[:, 1:], hy + oyB[:, 1:]])
    X, Y = np.meshgrid(xf, yc, indexing="ij")
    sidex = _subdomains("sidex", X, Y, [
        ("left", [left], _sel(0, nx + 1, 1, ny + 1), (hx, 0.0)),
        ("right", [right], _sel(1, nx + 2, 1, ny + 1), (-hx, 0.0)),
    ], px, py)

    # sidey (j, l) straddles y = y_l; local to (x_j, y_l)
    px = np.stack([-hx + oxR[:-1, :], hx + oxL[1:, :], hx + oxL[1:, :], -hx + oxR[:-1, :]])
    py = np.stack([oyB[:-1, :], oyB[1:, :], oyT[1:, :], oyT[:-1, :]])
    X, Y = np.meshgrid(xc, yf, indexing="ij")
    sidey = _subdomains("sidey", X, Y, [
        ("lower", [below], _sel(1, nx + 1, 0, ny + 1), (0.0, hy)),
        ("upper", [above], _sel(1, nx + 1, 1, ny + 2), (0.0, -hy)),
    ], px, py)

    # corner (i, l) is the rectangle [oxL, oxR] x [oyB, oyT] around the node,
    # so its four quadrant pieces are rectangles too
    X, Y = np.meshgrid(xf, yf, indexing="ij")
    pieces = []
    for name, wx, wy, sel, shift in (
            ("ll", oxL, oyB, _sel(0, nx + 1, 0, ny + 1), (hx, hy)),
            ("lr", oxR, oyB, _sel(1, nx + 2, 0, ny + 1), (-hx, hy)),
            ("ul", oxL, oyT, _sel(0, nx + 1, 1, ny + 2), (hx, -hy)),
            ("ur", oxR, oyT, _sel(1, nx + 2, 1, ny + 2), (-hx, -hy))):
        pieces.append(Piece(name, np.abs(wx * wy), 0.5 * wx, 0.5 * wy, sel, shift))
    area = (oxR - oxL) * (oyT - oyB)
    corner = Subdomains("corner", X, Y, pieces, area, 0.5 * (oxL + oxR), 0.5 * (oyB + oyT))
    return FanGeometry(v, central, sidex, sidey, corner)


# Evolution ---------------------------------------------------------------------

def edge_flux(case: int, ex, ey, F0, F1, G0, G1) -> np.ndarray:
    """Trapezoidal flux through a straight edge with edge vector ``(ex, ey)``.

    Case 1 edges run from their lower to their upper endpoint and carry the
    normal ``(ey, -ex)/L`` (pointing to +x for a vertical edge); case 2 edges
    run from left to right with normal ``(-ey, ex)/L`` (pointing to +y).
    The edge length cancels against the unit normal, so zero-length edges
    give exactly zero.
    """
    if case == 1:
        return 0.5 * (ey * (F0 + F1) - ex * (G0 + G1))
    if case == 2:
        return 0.5 * (ex * (G0 + G1) - ey * (F0 + F1))
    raise ValueError(f"edge case must be 1 or 2, got {case}")


@dataclass
class VertexStates:
    """Half-step deviation fluxes at the four fan vertices of every node."""

    F: dict[str, np.ndarray]
    G: dict[str, np.ndarray]


_VERTEX_OWNERS = {
    "ll": (0, 0, 1.0, 1.0), "lr": (1, 0, -1.0, 1.0),
    "ul": (0, 1, 1.0, -1.0), "ur": (1, 1, -1.0, -1.0),
}


def vertex_states(pred: Predictor, v: FanVertices, stat: StationaryState | None) -> VertexStates:
    g = v.grid
    nx, ny, hx, hy = g.nx, g.ny, 0.5 * g.dx, 0.5 * g.dy
    coords = v.absolute()
    F, G = {}, {}
    for name, (di, dk, sgx, sgy) in _VERTEX_OWNERS.items():
        ox = (v.oxR if di else v.oxL) + sgx * hx
        oy = (v.oyT if dk else v.oyB) + sgy * hy
        x, y = coords[name]
        V = pred.midpoint(_sel(di, nx + 1 + di, dk, ny + 1 + dk), ox, oy, x, y)
        qt = None if stat is None or stat.is_zero else stat(x, y)
        F[name] = deviation_flux(pred.model, V, qt, 0)
        G[name] = deviation_flux(pred.model, V, qt, 1)
    return VertexStates(F, G)


@dataclass
class EdgeFluxes:
    """Fluxes through every fan edge.

    ``corner_*`` are the four edges of each corner rectangle, ``xl``/``xr``
    the left/right edges of the side-x subdomains and ``yb``/``yt`` the
    bottom/top edges of the side-y subdomains, all with normals pointing to
    +x or +y.
    """

    corner_bottom: np.ndarray
    corner_top: np.ndarray
    corner_left: np.ndarray
    corner_right: np.ndarray
    xl: np.ndarray
    xr: np.ndarray
    yb: np.ndarray
    yt: np.ndarray


def edge_fluxes(vs: VertexStates, v: FanVertices) -> EdgeFluxes:
    g = v.grid
    dx, dy = g.dx, g.dy
    F, G = vs.F, vs.G
    oxL, oxR, oyB, oyT = v.oxL, v.oxR, v.oyB, v.oyT
    zero = np.zeros_like(oxL)
    cb = edge_flux(2, oxR - oxL, zero, F["ll"], F["lr"], G["ll"], G["lr"])
    ct = edge_flux(2, oxR - oxL, zero, F["ul"], F["ur"], G["ul"], G["ur"])
    cl = edge_flux(1, zero, oyT - oyB, F["ll"], F["ul"], G["ll"], G["ul"])
    cr = edge_flux(1, zero, oyT - oyB, F["lr"], F["ur"], G["lr"], G["ur"])
    hy_ = dy + oyB[:, 1:] - oyT[:, :-1]
    xl = edge_flux(1, oxL[:, 1:] - oxL[:, :-1], hy_,
                   F["ul"][:, :, :-1], F["ll"][:, :, 1:], G["ul"][:, :, :-1], G["ll"][:, :, 1:])
    xr = edge_flux(1, oxR[:, 1:] - oxR[:, :-1], hy_,
                   F["ur"][:, :, :-1], F["lr"][:, :, 1:], G["ur"][:, :, :-1], G["lr"][:, :, 1:])
    wx = dx + oxL[1:, :] - oxR[:-1, :]
    yb = edge_flux(2, wx, oyB[1:, :] - oyB[:-1, :],
                   F["lr"][:, :-1, :], F["ll"][:, 1:, :], G["lr"][:, :-1, :], G["ll"][:, 1:, :])
    yt = edge_flux(2, wx, oyT[1:, :] - oyT[:-1, :],
                   F["ur"][:, :-1, :], F["ul"][:, 1:, :], G["ur"][:, :-1, :], G["ul"][:, 1:, :])
    return EdgeFluxes(cb, ct, cl, cr, xl, xr, yb, yt)


def net_outflow(H: EdgeFluxes) -> dict[str, np.ndarray]:
    """Sum of outward edge fluxes around each subdomain."""
    return {
        "central": H.xl[:, 1:, :] - H.xr[:, :-1, :] + H.yb[:, :, 1:] - H.yt[:, :, :-1],
        "sidex": H.xr - H.xl + H.corner_bottom[:, :, 1:] - H.corner_top[:, :, :-1],
        "sidey": H.corner_left[:, 1:, :] - H.corner_right[:, :-1, :] + H.yt - H.yb,
        "corner": H.corner_right - H.corner_left + H.corner_top - H.corner_bottom,
    }


def _piece_points(sub: Subdomains, p: Piece):
    """Owner-relative offsets and global coordinates of a piece centroid."""
    ox = p.cx + p.shift[0]
    oy = p.cy + p.shift[1]
    return ox, oy, sub.origin_x + p.cx, sub.origin_y + p.cy


def _piece_sums(pred: Predictor, geom: FanGeometry, kinds, with_source: bool):
    """Area-weighted sums of ``Q`` and of ``S(Q^{n+1/2})`` at the piece centroids."""
    means, sources = {}, {}
    half = 0.5 * pred.dt
    for name in kinds:
        sub = getattr(geom, name)
        acc, sacc = 0.0, 0.0
        for p in sub.pieces:
            ox, oy, x, y = _piece_points(sub, p)
            Q = pred.values(p.owner, ox, oy)
            acc = acc + p.area * Q
            if with_source:
                V = Q + pred.drift[p.owner] + half * pred.model.source(Q, x, y)
                sacc = sacc + p.area * pred.model.source(V, x, y)
        means[name] = _divide_area(acc, sub.area)
        if with_source:
            sources[name] = _divide_area(sacc, sub.area)
    return means, sources


def subdomain_average(pred: Predictor, geom: FanGeometry, kind: str | None = None):
    """Exact means of the piecewise-linear reconstruction over subdomains.

    Returns a dict of arrays keyed by subdomain kind, or one array when
    ``kind`` is given.  Zero-area subdomains get 0.
    """
    means, _ = _piece_sums(pred, geom, KINDS if kind is None else (kind,), False)
    return means if kind is None else means[kind]


def source_average(pred: Predictor, geom: FanGeometry, kind: str | None = None):
    """Area-weighted source of the half-step centroid values over subdomains."""
    if not pred.model.has_source:
        raise ValueError("model has no source term")
    _, sources = _piece_sums(pred, geom, KINDS if kind is None else (kind,), True)
    return sources if kind is None else sources[kind]


def _divide_area(acc, area):
    acc = np.asarray(acc, dtype=float)
    ok = area > 0
    return np.where(ok, acc / np.where(ok, area, 1.0), 0.0)


@dataclass
class IntermediateAverages:
    """New averages over every subdomain after one step, keyed like the geometry."""

    central: np.ndarray
    sidex: np.ndarray
    sidey: np.ndarray
    corner: np.ndarray

    def get(self, kind: str) -> np.ndarray:
        return getattr(self, kind)


def evolve_subdomains(pred: Predictor, geom: FanGeometry, stat: StationaryState | None) -> IntermediateAverages:
    """Integrate the deviation balance law over every fan subdomain."""
    dt = pred.dt
    H = edge_fluxes(vertex_states(pred, geom.vertices, stat), geom.vertices)
    out_flux = net_outflow(H)
    has_source = pred.model.has_source
    means, sources = _piece_sums(pred, geom, KINDS, has_source)
    result = {}
    for name in KINDS:
        sub = getattr(geom, name)
        w = means[name] - dt * _divide_area(out_flux[name], sub.area)
        if has_source:
            w = w + dt * sources[name]
        result[name] = w
    return IntermediateAverages(**result)


# Projection --------------------------------------------------------------------

def _safe_div(num, den):
    ok = den != 0
    return np.where(ok, num / np.where(ok, den, 1.0), 0.0)


def projection_slope(w0, z0, wL, zL, wR, zR, has_left, has_right, theta: float) -> np.ndarray:
    """Minmod slope on unevenly spaced centroids.

    Where a neighbor is flagged missing the available one-sided difference
    is used twice; with no neighbor at all the slope is zero.
    """
    fwd = _safe_div(wR - w0, zR - z0)
    bwd = _safe_div(w0 - wL, z0 - zL)
    cen = _safe_div(wR - wL, zR - zL)
    fwd = np.where(has_right, fwd, 0.0)
    bwd = np.where(has_left, bwd, 0.0)
    f = np.where(has_right, fwd, bwd)
    b = np.where(has_left, bwd, fwd)
    c = np.where(has_left & has_right, cen, np.where(has_right, fwd, bwd))
    return minmod3(theta * b, c, theta * f)


@dataclass(frozen=True)
class EdgeRule:
    """How the projection slopes see past one domain edge.

    ``kind`` is the boundary kind of that side.  Periodic sides wrap around.
    Otherwise ``rule="mirror"`` reflects the adjacent subdomain across the
    edge (negating the normal momentum ``flip`` on reflecting walls), so a
    boundary subdomain gets the same minmod stencil as an interior one;
    ``rule="duplicate"`` drops the missing neighbor and reuses the
    one-sided difference.
    """

    kind: str = "outflow"
    rule: str = "mirror"
    flip: int | None = None


def _ghost_row(w, z, axis, first: bool, edge: EdgeRule, bound: float, period: float):
    idx = [0] if first else [-1]
    if edge.kind == "periodic":
        other = [-1] if first else [0]
        return (np.take(w, other, axis=axis + 1),
                np.take(z, other, axis=axis) + (-period if first else period), True)
    if edge.rule == "duplicate":
        return np.zeros_like(np.take(w, idx, axis=axis + 1)), np.take(z, idx, axis=axis), False
    gw = np.take(w, idx, axis=axis + 1).copy()
    if edge.kind == "reflecting" and edge.flip is not None:
        gw[edge.flip] *= -1.0
    return gw, 2.0 * bound - np.take(z, idx, axis=axis), True


def _neighbors_padded(w, z, axis, lo: EdgeRule, hi: EdgeRule, bounds, period):
    """Left/right neighbor arrays for a target one longer than ``w`` along ``axis``."""
    gw_lo, gz_lo, has_lo = _ghost_row(w, z, axis, True, lo, bounds[0], period)
    gw_hi, gz_hi, has_hi = _ghost_row(w, z, axis, False, hi, bounds[1], period)
    wl = np.concatenate([gw_lo, w], axis=axis + 1)
    wr = np.concatenate([w, gw_hi], axis=axis + 1)
    zl = np.concatenate([gz_lo, z], axis=axis)
    zr = np.concatenate([z, gz_hi], axis=axis)
    hl = np.ones(zl.shape, dtype=bool)
    hr = np.ones(zl.shape, dtype=bool)
    first = [slice(None), slice(None)]
    first[axis] = 0
    last = [slice(None), slice(None)]
    last[axis] = -1
    hl[tuple(first)] = has_lo
    hr[tuple(last)] = has_hi
    return wl, zl, wr, zr, hl, hr


def edge_rules(bc=None, model=None, rule: str = "mirror"):
    """Per-side :class:`EdgeRule` objects ``((x_lo, x_hi), (y_lo, y_hi))``."""
    if rule not in ("mirror", "duplicate"):
        raise ValueError(f"projection boundary rule must be 'mirror' or 'duplicate', got {rule!r}")
    if bc is None:
        kinds = (("outflow", "outflow"), ("outflow", "outflow"))
    else:
        kinds = ((bc.x_lo, bc.x_hi), (bc.y_lo, bc.y_hi))
    out = []
    for axis, pair in enumerate(kinds):
        flip = None
        if model is not None and getattr(model, "normal_momentum", None) is not None:
            flip = model.normal_momentum(axis)
        out.append(tuple(EdgeRule(k, rule, flip) for k in pair))
    return tuple(out)


def subdomain_slopes(inter: IntermediateAverages, geom: FanGeometry, theta: float = 1.5,
                     edges=None):
    """Limited x and y slopes of the side and corner subdomain averages.

    ``edges`` comes from :func:`edge_rules` and fixes what the subdomains
    along the domain boundary use as their outer neighbor.
    """
    cen, sx, sy, co = geom.central, geom.sidex, geom.sidey, geom.corner
    grid = geom.grid
    nx, ny = grid.nx, grid.ny
    (xlo, xhi), (ylo, yhi) = edges if edges is not None else edge_rules()
    xb, yb = (grid.x_min, grid.x_max), (grid.y_min, grid.y_max)
    px, py = grid.x_max - grid.x_min, grid.y_max - grid.y_min
    w = inter
    out = {}

    # sidex: x neighbors are centers, y neighbors corners
    wl, zl, wr, zr, hl, hr = _neighbors_padded(w.central, cen.centroid_x, 0, xlo, xhi, xb, px)
    gx = projection_slope(w.sidex, sx.centroid_x, wl, zl, wr, zr, hl, hr, theta)
    t = np.ones((nx + 1, ny), dtype=bool)
    gy = projection_slope(w.sidex, sx.centroid_y, w.corner[:, :, :-1], co.centroid_y[:, :-1],
                          w.corner[:, :, 1:], co.centroid_y[:, 1:], t, t, theta)
    out["sidex"] = (gx, gy)

    # sidey: x neighbors corners, y neighbors centers
    t = np.ones((nx, ny + 1), dtype=bool)
    gx = projection_slope(w.sidey, sy.centroid_x, w.corner[:, :-1, :], co.centroid_x[:-1, :],
                          w.corner[:, 1:, :], co.centroid_x[1:, :], t, t, theta)
    wl, zl, wr, zr, hl, hr = _neighbors_padded(w.central, cen.centroid_y, 1, ylo, yhi, yb, py)
    gy = projection_slope(w.sidey, sy.centroid_y, wl, zl, wr, zr, hl, hr, theta)
    out["sidey"] = (gx, gy)

    # corner: x neighbors sidey, y neighbors sidex
    wl, zl, wr, zr, hl, hr = _neighbors_padded(w.sidey, sy.centroid_x, 0, xlo, xhi, xb, px)
    gx = projection_slope(w.corner, co.centroid_x, wl, zl, wr, zr, hl, hr, theta)
    wl, zl, wr, zr, hl, hr = _neighbors_padded(w.sidex, sx.centroid_y, 1, ylo, yhi, yb, py)
    gy = projection_slope(w.corner, co.centroid_y, wl, zl, wr, zr, hl, hr, theta)
    out["corner"] = (gx, gy)
    return out


# cell (j, k) piece -> (subdomain kind, piece name, index selector into that kind)
_CELL_PIECES = (
    ("sidex", "left", (slice(1, None), slice(None))),
    ("sidex", "right", (slice(None, -1), slice(None))),
    ("sidey", "lower", (slice(None), slice(1, None))),
    ("sidey", "upper", (slice(None), slice(None, -1))),
    ("corner", "ll", (slice(1, None), slice(1, None))),
    ("corner", "lr", (slice(None, -1), slice(1, None))),
    ("corner", "ul", (slice(1, None), slice(None, -1))),
    ("corner", "ur", (slice(None, -1), slice(None, -1))),
)


def project(inter: IntermediateAverages, geom: FanGeometry, theta: float = 1.5,
            slopes: bool = True, edges=None) -> np.ndarray:
    """Average the piecewise-linear subdomain data over each original cell.

    The central subdomain lies inside a single cell and needs no
    reconstruction.  Returns the interior deviation, shape ``(n_comp, nx, ny)``.
    """
    g = geom.grid
    grads = subdomain_slopes(inter, geom, theta, edges) if slopes else None
    total = geom.central.area * inter.central
    for kind, name, idx in _CELL_PIECES:
        sub = getattr(geom, kind)
        p = sub.piece(name)
        w = inter.get(kind)[(slice(None),) + idx]
        if grads is not None:
            gx, gy = grads[kind]
            w = (w + (p.cx[idx] - sub.cx[idx]) * gx[(slice(None),) + idx]
                 + (p.cy[idx] - sub.cy[idx]) * gy[(slice(None),) + idx])
        total = total + p.area[idx] * w
    return total / (g.dx * g.dy)


# Driver ------------------------------------------------------------------------

def _reconstruct(dev: StateField, stat: StationaryState | None, theta: float):
    grid = dev.grid
    ring = _ring(grid)
    sx = limited_slope(dev.data, grid.dx, theta, axis=1)[ring]
    sy = limited_slope(dev.data, grid.dy, theta, axis=2)[ring]
    xc, yc = _ring_coords(grid)
    return full_interface_states(dev.data[ring], sx, sy, grid, xc, yc, stat)


def fully_discrete_speeds(dev: StateField, stat: StationaryState | None, model,
                          config: SchemeConfig) -> SpeedField:
    """Local speeds on the ring block of a ghost-filled deviation field."""
    return local_speeds(_reconstruct(dev, stat, config.theta), model, config.eps)


def step_fully_discrete(dev: StateField, stat: StationaryState | None, model,
                        config: SchemeConfig, dt: float,
                        speeds: SpeedField | None = None) -> StateField:
    """Advance a ghost-filled deviation field by ``dt``; ghosts of the result are filled."""
    if dt < 0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    if dt == 0:
        return dev.copy()
    try:
        if speeds is None:
            speeds = fully_discrete_speeds(dev, stat, model, config)
        geom = build_geometry(fan_vertices(speeds, dt, dev.grid))
        pred = predictor_midpoint(dev, stat, model, dt, config.theta)
        inter = evolve_subdomains(pred, geom, stat)
        edges = edge_rules(config.bc, model, config.projection_boundary)
        new = project(inter, geom, config.theta, config.projection_slopes, edges)
    except NonphysicalState as exc:
        raise NonphysicalState(f"fully-discrete step: {exc}") from exc
    out = StateField.zeros(dev.grid, dev.n_comp)
    out.interior[...] = new
    return fill_ghosts(out, config.bc, model)
