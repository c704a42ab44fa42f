import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbkt import BoundarySpec, ConfigError, StateField, fill_ghosts, make_grid
from wbkt.models import EulerModel, burgers


def test_make_grid_square():
    g = make_grid(200, 200, (0, 1, 0, 1), 2)
    assert g.dx == pytest.approx(0.005, abs=1e-15)
    assert g.dy == pytest.approx(0.005, abs=1e-15)


def test_make_grid_single_cell():
    g = make_grid(1, 1, (0, 1, 0, 1), 2)
    assert (g.dx, g.dy) == (1.0, 1.0)
    assert g.cell_center(0, 0) == (0.5, 0.5)
    assert StateField.zeros(g, 1).interior.shape == (1, 1, 1)


def test_make_grid_tube():
    g = make_grid(400, 10, (0, 1, 0, 1), 2)
    assert g.dx == pytest.approx(0.0025)
    assert g.dy == pytest.approx(0.1)


def test_cell_centers():
    g = make_grid(4, 2, (1, 2, -1, 1))
    np.testing.assert_allclose(g.x_centers(), 1 + (np.arange(4) + 0.5) * 0.25)
    np.testing.assert_allclose(g.y_centers(with_ghosts=True), -1 + (np.arange(-2, 4) + 0.5))


@pytest.mark.parametrize("args", [(0, 4, (0, 1, 0, 1)), (4, -1, (0, 1, 0, 1)),
                                  (4, 4, (1, 1, 0, 1)), (4, 4, (0, 1, 2, 1)),
                                  (4, 4, (0, np.inf, 0, 1)), (4, 4, (0, 1, 0))])
def test_make_grid_rejects(args):
    with pytest.raises(ConfigError):
        make_grid(*args)


def test_make_grid_rejects_thin_ghost():
    with pytest.raises(ConfigError):
        make_grid(4, 4, (0, 1, 0, 1), ghost=1)


def test_boundary_spec_validation():
    with pytest.raises(ConfigError):
        BoundarySpec("wall")
    with pytest.raises(ConfigError):
        BoundarySpec("periodic", "outflow")


def test_outflow_copies_edge_value():
    g = make_grid(3, 3)
    f = StateField.from_interior(g, np.arange(9.0).reshape(1, 3, 3))
    fill_ghosts(f, BoundarySpec(), burgers())
    d = f.data[0]
    np.testing.assert_array_equal(d[0, 2:5], d[2, 2:5])
    np.testing.assert_array_equal(d[1, 2:5], d[2, 2:5])
    np.testing.assert_array_equal(d[6, 2:5], d[4, 2:5])


def test_reflecting_flips_normal_momentum():
    g = make_grid(3, 3)
    q = np.zeros((4, 3, 3))
    q[:, 0, :] = np.array([1.0, 2.0, 3.0, 5.0])[:, None]
    f = fill_ghosts(StateField.from_interior(g, q), BoundarySpec.uniform("reflecting"), EulerModel())
    np.testing.assert_array_equal(f.data[:, 1, 2], [1.0, -2.0, 3.0, 5.0])


def test_reflecting_needs_momentum_components():
    g = make_grid(3, 3)
    with pytest.raises(ConfigError):
        fill_ghosts(StateField.zeros(g, 1), BoundarySpec.uniform("reflecting"), None)


def test_periodic_wraps():
    g = make_grid(4, 4)
    f = StateField.from_interior(g, np.arange(16.0).reshape(1, 4, 4))
    fill_ghosts(f, BoundarySpec.uniform("periodic"))
    # ghost j = -1 is padded index 1, interior j = 3 is padded index 5
    np.testing.assert_array_equal(f.data[0, 1, 2:6], f.data[0, 5, 2:6])
    np.testing.assert_array_equal(f.data[0, 0, 2:6], f.data[0, 4, 2:6])
    np.testing.assert_array_equal(f.data[0, 6, 2:6], f.data[0, 2, 2:6])


kinds = st.sampled_from(["outflow", "reflecting", "periodic"])


@st.composite
def specs(draw):
    kx, ky = draw(kinds), draw(kinds)
    if kx == "periodic":
        xs = ("periodic", "periodic")
    else:
        xs = (kx, draw(st.sampled_from(["outflow", "reflecting"])))
    if ky == "periodic":
        ys = ("periodic", "periodic")
    else:
        ys = (ky, draw(st.sampled_from(["outflow", "reflecting"])))
    return BoundarySpec(*xs, *ys)


@settings(max_examples=40, deadline=None)
@given(spec=specs(), nx=st.integers(2, 6), ny=st.integers(2, 6), seed=st.integers(0, 2**16))
def test_fill_ghosts_idempotent(spec, nx, ny, seed):
    g = make_grid(nx, ny)
    q = np.random.default_rng(seed).standard_normal((4, nx, ny))
    f = fill_ghosts(StateField.from_interior(g, q), spec, EulerModel())
    once = f.data.copy()
    fill_ghosts(f, spec, EulerModel())
    np.testing.assert_array_equal(f.data, once)


@settings(max_examples=40, deadline=None)
@given(spec=specs(), nx=st.integers(2, 5), ny=st.integers(2, 5),
       c=st.lists(st.floats(-10, 10), min_size=4, max_size=4))
def test_constant_data_stays_constant(spec, nx, ny, c):
    g = make_grid(nx, ny)
    q = np.broadcast_to(np.array(c)[:, None, None], (4, nx, ny))
    f = fill_ghosts(StateField.from_interior(g, q), spec, EulerModel())
    for comp in (0, 3):
        assert np.all(f.data[comp] == c[comp])
    for comp in (1, 2):
        assert np.all(np.abs(f.data[comp]) == abs(c[comp]))
    if not spec.uses_reflecting:
        assert np.all(f.data == np.array(c)[:, None, None])
