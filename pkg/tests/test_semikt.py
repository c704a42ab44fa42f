import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbkt import (BoundarySpec, DivisionByZeroSpeed, SchemeConfig, StateField, StationaryState,
                  fill_ghosts, integrate, make_grid, semi_discrete_rhs, step_semi_discrete)
from wbkt.deviation import deviation_flux
from wbkt.harness import smooth_random_field
from wbkt.models import (EulerModel, burgers, euler_to_conserved, isothermal_equilibrium,
                         linear_advection, linear_potential, zero_flux)
from wbkt.semikt import (CflReport, cfl_report, max_principle_monitor, numerical_flux,
                         numerical_flux_x, numerical_flux_y, stationary_residual)

G = 1.4


def iso_stat():
    def f(x, y):
        return euler_to_conserved(isothermal_equilibrium(x, y, 1.21, 1.0, 1.0, 1.0), G)
    return StationaryState(f, 4, "isothermal")


def field(grid, values, bc=BoundarySpec(), model=None):
    return fill_ghosts(StateField.from_interior(grid, values), bc, model)


# numerical fluxes ------------------------------------------------------------------

def test_flux_zero_deviation():
    qt = euler_to_conserved(isothermal_equilibrium(np.array([0.3]), 0.2, 1.21, 1, 1, 1), G)
    z = np.zeros_like(qt)
    assert np.all(numerical_flux_x(z, z, qt, 1.5, -1.2, EulerModel(G)) == 0.0)
    assert np.all(numerical_flux_y(z, z, qt, 1.5, -1.2, EulerModel(G)) == 0.0)


def test_flux_hand_example():
    h = numerical_flux_x(np.array([0.0]), np.array([1.0]), None, 1.0, -1.0, linear_advection(1, 1))
    assert h[0] == pytest.approx(0.0, abs=1e-15)


valid = st.tuples(st.floats(0.2, 4), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.2, 4))


@settings(max_examples=100, deadline=None)
@given(valid, st.lists(st.floats(-0.1, 0.1), min_size=4, max_size=4),
       st.floats(1e-3, 5), st.floats(1e-3, 5), st.sampled_from([0, 1]))
def test_flux_consistency(w, d, ap, am, axis):
    """Equal deviations on both sides give back the deviation flux exactly."""
    from wbkt.models import PrimitiveState
    model = EulerModel(G)
    qt = euler_to_conserved(PrimitiveState(*w), G)
    delta = np.array(d)
    got = numerical_flux(delta, delta, qt, ap, -am, model, axis)
    want = deviation_flux(model, delta, qt, axis)
    np.testing.assert_allclose(got, want, rtol=1e-13, atol=1e-14)


def test_dead_interface():
    u = np.array([[0.0]])
    h = numerical_flux(u, u, None, np.array([0.0]), np.array([0.0]), zero_flux(), 0, floor=0.0)
    assert h[0, 0] == 0.0
    with pytest.raises(DivisionByZeroSpeed):
        numerical_flux(u, u + 1, None, np.array([0.0]), np.array([0.0]), zero_flux(), 0, floor=0.0)
    h = numerical_flux(u, u + 1, None, np.array([0.0]), np.array([0.0]), zero_flux(), 0, floor=1e-12)
    assert np.isfinite(h).all()


# right-hand side ------------------------------------------------------------------

def test_rhs_zero_deviation():
    g = make_grid(6, 5)
    model = EulerModel(G, linear_potential(1, 1))
    r = semi_discrete_rhs(field(g, np.zeros((4, 6, 5)), model=model), iso_stat(), model, SchemeConfig())
    assert np.all(r.values == 0.0)


def test_rhs_constant_scalar():
    g = make_grid(4, 4)
    r = semi_discrete_rhs(field(g, np.full((1, 4, 4), 0.8)), None, burgers(), SchemeConfig())
    assert np.all(r.values == 0.0)


def test_rhs_three_cell_advection_hand_value():
    # f = u along x, zero data around a unit bump; the limiter zeroes every slope
    g = make_grid(3, 1, (0, 3, 0, 1))
    dev = field(g, np.array([0.0, 1.0, 0.0]).reshape(1, 3, 1))
    r = semi_discrete_rhs(dev, None, linear_advection(1.0, 0.0), SchemeConfig())
    # upwind fluxes: H_{1/2} = 0, H_{3/2} = 1  ->  rhs = -(1 - 0)/dx
    assert r.values[0, 1, 0] == pytest.approx(-1.0)
    assert r.values[0, 2, 0] == pytest.approx(1.0)
    assert r.values[0, 0, 0] == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 10), st.integers(3, 10), st.integers(0, 2**16),
       st.sampled_from(["burgers", "advection"]))
def test_periodic_conservation(nx, ny, seed, which):
    model = burgers() if which == "burgers" else linear_advection(0.7, -1.3)
    g = make_grid(nx, ny)
    spec = BoundarySpec.uniform("periodic")
    cfg = SchemeConfig(bc=spec)
    u = np.random.default_rng(seed).standard_normal((1, nx, ny))
    dev = field(g, u, spec)
    dt = 0.1 * g.dx / (1 + np.abs(u).max())
    out = step_semi_discrete(dev, None, model, cfg, dt)
    before = u.sum() * g.dx * g.dy
    after = out.interior.sum() * g.dx * g.dy
    assert after == pytest.approx(before, rel=1e-12, abs=1e-13)


# integration ------------------------------------------------------------------------

def test_integrate_t_zero():
    g = make_grid(4, 4)
    dev = field(g, np.random.default_rng(0).standard_normal((1, 4, 4)))
    traj = integrate(dev, None, burgers(), SchemeConfig(), 0.0)
    assert traj.steps == 0 and np.array_equal(traj.final.interior, dev.interior)


@pytest.mark.parametrize("method", ["forward_euler", "ssp_rk2"])
def test_integrate_zero_deviation(method):
    g = make_grid(10, 10)
    model = EulerModel(G, linear_potential(1, 1))
    dev = field(g, np.zeros((4, 10, 10)), model=model)
    traj = integrate(dev, iso_stat(), model, SchemeConfig(), 0.05, method=method)
    assert traj.t == 0.05 and traj.steps > 0
    assert np.max(np.abs(traj.final.interior)) <= 1e-13


def test_forward_euler_is_definitional():
    g = make_grid(6, 6)
    model = linear_advection(1.0, 0.5)
    spec = BoundarySpec.uniform("periodic")
    cfg = SchemeConfig(bc=spec)
    dev = field(g, np.random.default_rng(1).standard_normal((1, 6, 6)), spec)
    dt = 0.01
    traj = integrate(dev, None, model, cfg, dt, dt_fixed=dt)
    want = dev.interior + dt * semi_discrete_rhs(dev, None, model, cfg).values
    assert traj.steps == 1
    np.testing.assert_array_equal(traj.final.interior, want)


def test_integrate_lands_on_t_end():
    g = make_grid(8, 8)
    spec = BoundarySpec.uniform("periodic")
    X, Y = g.mesh()
    dev = field(g, smooth_random_field(X, Y, 3)[None], spec)
    traj = integrate(dev, None, burgers(), SchemeConfig(bc=spec), 0.1234, record=True)
    assert traj.t == 0.1234 and traj.times[-1] == 0.1234
    assert len(traj.states) == traj.steps + 1


# maximum principle ------------------------------------------------------------------

def test_monitor_constant_data():
    states = [np.full((4, 4), 2.0)] * 5
    assert max_principle_monitor(states).ok


def test_monitor_detects_increase():
    rep = max_principle_monitor([np.array([1.0, 0.0]), np.array([1.0, 0.5]), np.array([1.2, 0.0])])
    assert not rep.ok
    assert rep.first_violation[0] == 2
    assert not rep.certified


def test_burgers_hump_under_eighth_cfl():
    g = make_grid(32, 32)
    spec = BoundarySpec.uniform("periodic")
    cfg = SchemeConfig(bc=spec, cfl=0.125)
    X, Y = g.mesh()
    u = np.exp(-30 * ((X - 0.5) ** 2 + (Y - 0.5) ** 2))
    traj = integrate(field(g, u[None], spec), None, burgers(), cfg, 10.0, record=True,
                     max_steps=100, monitor_cfl=True)
    rep = max_principle_monitor(traj)
    assert traj.steps == 100
    assert rep.ok and rep.certified


def test_rk2_never_certified():
    g = make_grid(8, 8)
    spec = BoundarySpec.uniform("periodic")
    X, Y = g.mesh()
    traj = integrate(field(g, smooth_random_field(X, Y, 1)[None], spec), None, burgers(),
                     SchemeConfig(bc=spec, cfl=0.1), 0.05, method="ssp_rk2", record=True,
                     monitor_cfl=True)
    rep = max_principle_monitor(traj)
    assert not rep.certified and "forward Euler" in rep.reason


# CFL report ----------------------------------------------------------------------

def test_cfl_report_examples():
    r = CflReport.from_speeds(2.0, 0.0, 0.01, 0.01, 0.000625)
    assert r.courant == pytest.approx(0.125) and r.satisfied
    assert CflReport.from_speeds(2.0, 2.0, 0.01, 0.01, 0.0).satisfied
    assert not CflReport.from_speeds(2.0, 0.0, 0.01, 0.01, 0.001).satisfied


def test_cfl_report_from_field():
    g = make_grid(4, 4)
    r = cfl_report(field(g, np.full((1, 4, 4), -2.0)), None, burgers(), 0.25 * 0.125 / 2)
    assert r.max_fx == 2.0 and r.satisfied


# stationary residual ------------------------------------------------------------

def test_residual_constant_state():
    stat = StationaryState.constant([1.0, 0.2, -0.1, 3.0])
    r = stationary_residual(stat, EulerModel(G), SchemeConfig(), make_grid(6, 6))
    assert np.max(np.abs(r)) <= 1e-14


def test_residual_deviation_form_vanishes():
    model = EulerModel(G, linear_potential(1, 1))
    r = stationary_residual(iso_stat(), model, SchemeConfig(), make_grid(8, 8), form="deviation")
    assert np.all(r == 0.0)


def test_residual_second_order():
    """Steady state of u_t + u_x + u_y/2 = 0 on a refined grid pair.

    With ``|a| != |b|`` the leading x and y truncation terms do not cancel,
    so the residual shows the scheme's true order.  The outflow boundary
    band is excluded.
    """
    model = linear_advection(1.0, 0.5)
    stat = StationaryState(lambda x, y: np.exp(0.5 * x - y)[None], 1, "steady")
    errs = []
    for n in (32, 64):
        r = stationary_residual(stat, model, SchemeConfig(), make_grid(n, n))[0]
        errs.append(np.max(np.abs(r[3:-3, 3:-3])))
    ratio = errs[0] / errs[1]
    assert 3.2 <= ratio <= 4.8
