"""Package solvers against the loop-based transcriptions in ``oracles.py``."""
import itertools

import numpy as np
import pytest

import oracles as O
from wbkt import BoundarySpec, SchemeConfig, StateField, StationaryState, fill_ghosts, make_grid
from wbkt.fullkt import fully_discrete_speeds, step_fully_discrete
from wbkt.harness import compute_dt
from wbkt.models import (EulerModel, burgers, euler_to_conserved, isothermal_equilibrium,
                         linear_advection, linear_potential)
from wbkt.semikt import convex_combination_step, semi_discrete_rhs, step_semi_discrete

TOL = 1e-12
BOUNDS = (0.0, 1.0, 0.0, 0.7)
BCS = [("outflow",) * 4, ("reflecting",) * 4, ("periodic",) * 4,
       ("outflow", "reflecting", "periodic", "periodic"),
       ("periodic", "periodic", "reflecting", "outflow")]


def iso_stat(gamma=1.4):
    def f(x, y):
        return euler_to_conserved(isothermal_equilibrium(x, y, 1.21, 1.0, 1.0, 1.0), gamma)
    return StationaryState(f, 4, "isothermal")


def instance(case, rng, nx, ny):
    if case == "euler":
        model = EulerModel(1.4, linear_potential(1.0, 1.0))
        return model, iso_stat(), O.EulerPhysics(), 0.005 * rng.standard_normal((4, nx, ny))
    if case == "burgers":
        return burgers(), None, O.burgers(), rng.standard_normal((1, nx, ny))
    return (linear_advection(1.0, -0.5), None, O.advection(1.0, -0.5),
            rng.standard_normal((1, nx, ny)))


CASES = list(itertools.product(range(len(BCS)), ["euler", "burgers", "advection"], [0, 1]))


@pytest.mark.parametrize("ib,case,seed", CASES)
def test_fully_discrete_step_matches_oracle(ib, case, seed):
    rng = np.random.default_rng(100 * ib + seed)
    nx, ny = (int(v) for v in rng.integers(2, 5, 2))
    bcs = BCS[ib]
    model, stat, phys, dq = instance(case, rng, nx, ny)
    g = make_grid(nx, ny, BOUNDS)
    bc = BoundarySpec(*bcs)
    cfg = SchemeConfig(bc=bc)
    dev = fill_ghosts(StateField.from_interior(g, dq), bc, model)
    dt = compute_dt(fully_discrete_speeds(dev, stat, model, cfg), g, 0.4)
    got = step_fully_discrete(dev, stat, model, cfg, dt).interior
    want = O.fully_discrete_step(dq, BOUNDS, phys, dt, 1.5, 1e-8, bcs)
    assert np.max(np.abs(got - want)) <= TOL


@pytest.mark.parametrize("ib,case,seed", CASES)
def test_semi_discrete_rhs_matches_oracle(ib, case, seed):
    rng = np.random.default_rng(200 + 100 * ib + seed)
    nx, ny = (int(v) for v in rng.integers(2, 5, 2))
    bcs = BCS[ib]
    model, stat, phys, dq = instance(case, rng, nx, ny)
    g = make_grid(nx, ny, BOUNDS)
    bc = BoundarySpec(*bcs)
    dev = fill_ghosts(StateField.from_interior(g, dq), bc, model)
    got = semi_discrete_rhs(dev, stat, model, SchemeConfig(bc=bc)).values
    want = O.semi_discrete_rhs(dq, BOUNDS, phys, 1.5, bcs)
    assert np.max(np.abs(got - want)) <= TOL


@pytest.mark.parametrize("seed", range(6))
@pytest.mark.parametrize("model", [burgers(), linear_advection(1.0, -0.5)], ids=["burgers", "advection"])
def test_convex_combination_matches_forward_euler(seed, model):
    rng = np.random.default_rng(seed)
    nx, ny = (int(v) for v in rng.integers(3, 9, 2))
    g = make_grid(nx, ny)
    bc = BoundarySpec.uniform("periodic")
    cfg = SchemeConfig(bc=bc, speed_floor=0.0)
    dev = fill_ghosts(StateField.from_interior(g, rng.standard_normal((1, nx, ny))), bc, model)
    dt = 0.1 * min(g.dx, g.dy)
    direct = step_semi_discrete(dev, None, model, cfg, dt, "forward_euler").interior
    combo, coef = convex_combination_step(dev, model, cfg, dt)
    assert np.max(np.abs(direct - combo)) <= TOL
    assert np.max(np.abs(sum(coef.values()) - 1.0)) <= TOL


def test_convex_coefficients_nonnegative_under_eighth_cfl():
    rng = np.random.default_rng(7)
    g = make_grid(8, 8)
    bc = BoundarySpec.uniform("periodic")
    model = burgers()
    cfg = SchemeConfig(bc=bc, speed_floor=0.0)
    dev = fill_ghosts(StateField.from_interior(g, rng.uniform(-1, 1, (1, 8, 8))), bc, model)
    umax = float(np.max(np.abs(dev.data)))
    dt = 0.125 * g.dx / umax
    _, coef = convex_combination_step(dev, model, cfg, dt)
    assert min(float(np.min(c)) for c in coef.values()) >= -1e-14
