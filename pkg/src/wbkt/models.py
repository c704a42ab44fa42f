"""Balance-law models: 2D Euler with prescribed gravity and scalar conservation laws.

State arrays carry the component on axis 0, so a field of Euler states has
shape ``(4, ...)`` holding ``(rho, rho*u1, rho*u2, E)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError, NonphysicalState

GradPhi = Callable[[np.ndarray, np.ndarray], tuple]


def _axis_index(axis) -> int:
    if axis in (0, "x"):
        return 0
    if axis in (1, "y"):
        return 1
    raise ConfigError(f"axis must be 0/'x' or 1/'y', got {axis!r}")


@dataclass
class PrimitiveState:
    """Density, velocities and pressure (scalars or broadcastable arrays)."""

    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    p: np.ndarray

    def conserved(self, gamma: float) -> np.ndarray:
        return euler_to_conserved(self, gamma)


def euler_to_conserved(w: PrimitiveState, gamma: float) -> np.ndarray:
    """Map ``(rho, u1, u2, p)`` to ``(rho, rho*u1, rho*u2, E)``."""
    rho, u1, u2, p = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                           for v in (w.rho, w.u1, w.u2, w.p)))
    E = p / (gamma - 1.0) + 0.5 * rho * (u1 * u1 + u2 * u2)
    return np.stack([rho, rho * u1, rho * u2, E])


def _report_bad(mask: np.ndarray, what: str, q: np.ndarray) -> None:
    idx = np.argwhere(np.atleast_1d(mask))[0]
    where = tuple(int(i) for i in idx)
    raise NonphysicalState(f"{what} at array index {where} (state {q[(slice(None),) + where] if q.ndim > 1 else q})")


def euler_pressure(q: np.ndarray, gamma: float) -> np.ndarray:
    """Pressure ``(gamma-1)*(E - |m|^2/(2 rho))``; raises on nonpositive rho or p."""
    q = np.asarray(q, dtype=float)
    rho = q[0]
    bad = ~(rho > 0.0)
    if np.any(bad):
        _report_bad(bad, "nonpositive density", q)
    p = (gamma - 1.0) * (q[3] - 0.5 * (q[1] * q[1] + q[2] * q[2]) / rho)
    bad = ~(p > 0.0)
    if np.any(bad):
        _report_bad(bad, "nonpositive pressure", q)
    return p


def conserved_to_primitive(q: np.ndarray, gamma: float) -> PrimitiveState:
    q = np.asarray(q, dtype=float)
    p = euler_pressure(q, gamma)
    return PrimitiveState(q[0], q[1] / q[0], q[2] / q[0], p)


def euler_flux_x(q: np.ndarray, gamma: float) -> np.ndarray:
    p = euler_pressure(q, gamma)
    u = q[1] / q[0]
    return np.stack([q[1], q[1] * u + p, q[2] * u, (q[3] + p) * u])


def euler_flux_y(q: np.ndarray, gamma: float) -> np.ndarray:
    p = euler_pressure(q, gamma)
    v = q[2] / q[0]
    return np.stack([q[2], q[1] * v, q[2] * v + p, (q[3] + p) * v])


def euler_speed_bounds(q: np.ndarray, gamma: float, axis) -> tuple[np.ndarray, np.ndarray]:
    """Smallest and largest eigenvalue ``u_n -/+ c`` of the flux Jacobian."""
    ax = _axis_index(axis)
    q = np.asarray(q, dtype=float)
    p = euler_pressure(q, gamma)
    c = np.sqrt(gamma * p / q[0])
    un = q[1 + ax] / q[0]
    return un - c, un + c


def euler_source(q: np.ndarray, grad_phi) -> np.ndarray:
    """Gravity source ``(0, -rho phi_x, -rho phi_y, -m1 phi_x - m2 phi_y)``.

    Linear in ``q`` for a fixed gradient, which is what lets the deviation
    form drop the stationary part.
    """
    q = np.asarray(q, dtype=float)
    phx, phy = grad_phi
    out = np.empty(np.broadcast_shapes(q.shape, (1,) + np.shape(phx), (1,) + np.shape(phy)))
    out[0] = 0.0
    out[1] = -q[0] * phx
    out[2] = -q[0] * phy
    out[3] = -q[1] * phx - q[2] * phy
    return out


def linear_potential(phi_x: float, phi_y: float) -> GradPhi:
    """Gradient of the potential ``phi = phi_x*x + phi_y*y``."""
    def grad(x, y):
        return (np.full(np.shape(x), float(phi_x)), np.full(np.shape(y), float(phi_y)))
    return grad


def moving_potential(x, y, gamma: float) -> np.ndarray:
    """``phi = exp(s) * (-exp(s) + gamma*exp(-gamma*s))`` with ``s = x + y``."""
    s = np.asarray(x) + np.asarray(y)
    return np.exp(s) * (-np.exp(s) + gamma * np.exp(-gamma * s))


def moving_potential_gradient(gamma: float) -> GradPhi:
    """Analytic gradient of :func:`moving_potential`; both components are equal."""
    def grad(x, y):
        s = np.asarray(x, dtype=float) + np.asarray(y, dtype=float)
        d = -2.0 * np.exp(2.0 * s) + gamma * (1.0 - gamma) * np.exp((1.0 - gamma) * s)
        return d, d.copy()
    return grad


class EulerModel:
    """Compressible Euler equations for an ideal gas with a prescribed potential."""

    n_comp = 4
    component_names = ("rho", "rho_u1", "rho_u2", "E")

    def __init__(self, gamma: float = 1.4, grad_phi: GradPhi | None = None):
        if not gamma > 1.0:
            raise ConfigError(f"gamma must exceed 1, got {gamma}")
        self.gamma = float(gamma)
        self.grad_phi = grad_phi

    def __repr__(self):
        return f"EulerModel(gamma={self.gamma})"

    def flux(self, q, axis):
        if _axis_index(axis) == 0:
            return euler_flux_x(q, self.gamma)
        return euler_flux_y(q, self.gamma)

    def speed_bounds(self, q, axis):
        return euler_speed_bounds(q, self.gamma, axis)

    def source(self, dq, x, y):
        if self.grad_phi is None:
            return np.zeros(np.broadcast_shapes(np.shape(dq), (1,) + np.shape(x)))
        return euler_source(dq, self.grad_phi(x, y))

    @property
    def has_source(self) -> bool:
        return self.grad_phi is not None

    def normal_momentum(self, axis) -> int:
        return 1 + _axis_index(axis)

    def check(self, q) -> None:
        euler_pressure(q, self.gamma)


class ScalarModel:
    """Homogeneous scalar law ``u_t + f(u)_x + g(u)_y = 0``."""

    n_comp = 1
    component_names = ("u",)
    has_source = False

    def __init__(self, flux_x, flux_y, dflux_x, dflux_y, name: str = "scalar"):
        self.flux_x = flux_x
        self.flux_y = flux_y
        self.dflux_x = dflux_x
        self.dflux_y = dflux_y
        self.name = name

    def __repr__(self):
        return f"ScalarModel({self.name})"

    def flux(self, q, axis):
        q = np.asarray(q, dtype=float)
        return self.flux_x(q) if _axis_index(axis) == 0 else self.flux_y(q)

    def speed_bounds(self, q, axis):
        q = np.asarray(q, dtype=float)
        d = self.dflux_x(q[0]) if _axis_index(axis) == 0 else self.dflux_y(q[0])
        d = np.asarray(d, dtype=float) + np.zeros(q.shape[1:])
        return d, d

    def source(self, dq, x, y):
        return np.zeros(np.broadcast_shapes(np.shape(dq), (1,) + np.shape(x)))

    def normal_momentum(self, axis):
        return None

    def check(self, q) -> None:
        pass


def linear_advection(a: float = 1.0, b: float = 1.0) -> ScalarModel:
    return ScalarModel(lambda u: a * u, lambda u: b * u,
                       lambda u: np.full(np.shape(u), float(a)),
                       lambda u: np.full(np.shape(u), float(b)),
                       name=f"advection(a={a}, b={b})")


def burgers() -> ScalarModel:
    """2D Burgers, ``f = g = u^2/2``."""
    return ScalarModel(lambda u: 0.5 * u * u, lambda u: 0.5 * u * u,
                       lambda u: u, lambda u: u, name="burgers")


def zero_flux() -> ScalarModel:
    return ScalarModel(lambda u: np.zeros_like(u), lambda u: np.zeros_like(u),
                       lambda u: np.zeros(np.shape(u)), lambda u: np.zeros(np.shape(u)),
                       name="zero")


# Equilibria and initial states --------------------------------------------

def isothermal_equilibrium(x, y, rho0: float, p0: float, phi_x: float,
                           phi_y: float) -> PrimitiveState:
    """Hydrostatic isothermal state for the linear potential ``phi_x*x + phi_y*y``."""
    if not (rho0 > 0 and p0 > 0):
        raise ConfigError(f"rho0 and p0 must be positive, got {rho0}, {p0}")
    e = np.exp(-(rho0 / p0) * (phi_x * np.asarray(x, dtype=float) + phi_y * np.asarray(y, dtype=float)))
    zero = np.zeros_like(e)
    return PrimitiveState(rho0 * e, zero, zero.copy(), p0 * e)


def moving_equilibrium(x, y, rho0: float = 1.0, p0: float = 1.0, g: float = 1.0,
                       gamma: float = 1.4) -> PrimitiveState:
    """Moving state along the diagonal; pairs with :func:`moving_potential`.

    The pressure is read as ``exp(-(rho0*g/p0)*(x+y))**gamma``.
    """
    if not (rho0 > 0 and p0 > 0 and g > 0):
        raise ConfigError("moving equilibrium needs positive rho0, p0 and g")
    s = np.asarray(x, dtype=float) + np.asarray(y, dtype=float)
    e = np.exp(-(rho0 * g / p0) * s)
    u = np.exp(s)
    return PrimitiveState(rho0 * e, u, u.copy(), e ** gamma)


def perturbed_isothermal(x, y, eta: float = 1e-2, axis="x") -> PrimitiveState:
    """Isothermal state (``rho0 = p0 = 1``) along one axis plus a Gaussian pressure pulse."""
    s = np.asarray(x if _axis_index(axis) == 0 else y, dtype=float)
    s = s + np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))
    e = np.exp(-s)
    zero = np.zeros_like(e)
    return PrimitiveState(e, zero, zero.copy(), e + eta * np.exp(-100.0 * (s - 0.5) ** 2))


def shock_tube(x, y, x0: float = 0.5) -> PrimitiveState:
    """Two-state Riemann data along x: (1, 0, 0, 1) left, (0.125, 0, 0, 0.1) right."""
    x = np.asarray(x, dtype=float) + np.zeros(np.broadcast_shapes(np.shape(x), np.shape(y)))
    left = x <= x0
    zero = np.zeros_like(x)
    return PrimitiveState(np.where(left, 1.0, 0.125), zero, zero.copy(), np.where(left, 1.0, 0.1))
