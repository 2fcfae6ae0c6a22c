import numpy as np
import pytest

from hermite_hj import examples as ex
from hermite_hj import grid as gr
from hermite_hj import stepper as st
from hermite_hj.hamiltonian import get_model


class Const:
    node_kinks = False

    def __init__(self, value, dim=1):
        self.value, self.dim = value, dim

    def derivatives(self, *args, side=None):
        *pts, order = args
        shape = np.shape(pts[0]) + (order + 1,) * self.dim
        out = np.zeros(shape)
        out[(Ellipsis,) + (0,) * self.dim] = self.value
        return out


class Sin:
    node_kinks = False

    def derivatives(self, x, order, side=None):
        k = np.arange(order + 1)
        return np.sin(np.asarray(x)[..., None] + k * np.pi / 2)


def test_constant_initial_data():
    g = gr.GridSpec((0.0, 1.0), (5,))
    f = gr.init_field(g, 2, Const(3.0))
    assert np.array_equal(f.poly, np.tile([3.0, 0, 0, 0, 0, 0], (5, 1)))


def test_sin_scaled_derivatives():
    g = gr.GridSpec((0.0, 2 * np.pi), (2,))  # h = pi
    f = gr.init_field(g, 0, Sin())
    assert np.allclose(f.poly[0], [0.0, np.pi])


def test_one_sided_data_at_node_kink():
    e = ex.get_example("riemann-quartic")
    g, _, init = ex.build(e, 20, 1.0)
    f = gr.init_field(g, 2, init)
    i = 10  # x = 0
    h = g.h[0]
    assert g.axis_coords(gr.PRIMAL)[i] == 0.0
    assert f.sided[0, i, 1] == pytest.approx(2.0 * h)   # from the left
    assert f.sided[1, i, 1] == pytest.approx(-2.0 * h)  # from the right


def test_round_trip_values():
    g = gr.GridSpec((0.0, 2 * np.pi), (16,))
    f = gr.init_field(g, 3, Sin())
    assert np.array_equal(f.values(), np.sin(g.coords(gr.PRIMAL)))


def test_dual_coordinates():
    g = gr.GridSpec((0.0, 1.0), (2,))
    assert np.allclose(gr.dual_of(g, gr.PRIMAL), [0.25, 0.75])
    assert np.allclose(gr.dual_of(g, gr.DUAL), g.coords(gr.PRIMAL))
    g2 = gr.GridSpec((0.0, 1.0, 0.0, 1.0), (2, 2))
    X, Y = gr.dual_of(g2, gr.PRIMAL)
    assert sorted(zip(X.ravel(), Y.ravel())) == [
        (0.25, 0.25), (0.25, 0.75), (0.75, 0.25), (0.75, 0.75)]


def test_periodic_ghost_copy():
    g = gr.GridSpec((0.0, 1.0), (4,))
    poly = np.arange(8.0).reshape(4, 2)
    f = gr.NodeField(gr.DUAL, 0, poly)
    left, right = gr.ghost_exchange(f, g, gr.Periodic()).ends
    # the primal node at 0 sits between the last dual node and the first
    assert np.array_equal(left[0], poly[-1])
    assert np.array_equal(right[0], poly[0])


def test_constant_ghosts():
    g = gr.GridSpec((0.0, 1.0, 0.0, 1.0), (3, 3))
    f = gr.init_field(g, 1, Const(2.0, dim=2))
    for c in gr.ghost_exchange(f, g, gr.Periodic()).ends:
        assert np.all(c[..., 0, 0] == 2.0)


def test_ghost_exchange_shift_equivariant():
    rng = np.random.default_rng(0)
    g = gr.GridSpec((0.0, 1.0), (6,))
    poly = rng.normal(size=(6, 3))
    a = gr.ghost_exchange(gr.NodeField(gr.PRIMAL, 1, poly), g, gr.Periodic())
    b = gr.ghost_exchange(gr.NodeField(gr.PRIMAL, 1, np.roll(poly, 1, 0)), g,
                          gr.Periodic())
    for ea, eb in zip(a.ends, b.ends):
        assert np.array_equal(np.roll(ea, 1, 0), eb)


def test_dirichlet_boundary_matches_oracle():
    e = ex.get_example("riemann-quartic")
    g, mode, _ = ex.build(e, 21, 1.0)
    p = gr.boundary_polynomial(e.oracle, -1.0, 0.5, g.h[0], 5)
    assert p[0] == pytest.approx(float(e.oracle(np.array([-1.0]), 0.5)[0]),
                                 abs=1e-10)


def test_dirichlet_needs_nonperiodic_grid():
    g = gr.GridSpec((0.0, 1.0), (4,))
    f = gr.NodeField(gr.PRIMAL, 0, np.zeros((4, 2)))
    with pytest.raises(ValueError):
        gr.ghost_exchange(f, g, gr.DirichletExact(lambda x, t: x))


def test_padded_window_independent_of_pad():
    e = ex.get_example("riemann-sin2d")
    model = get_model(e.id)
    cfg = st.StepConfig(m=2, tfinal=0.2, cfl=0.1, substeps=1)
    out = []
    for pad in (8, 14):
        g, mode, init = ex.build(e, 20, 0.2, 0.1, pad_cells=pad, reach_cells=6)
        f, _ = st.run(gr.init_field(g, 2, init), g, model, cfg, mode)
        out.append(f.values()[g.physical_slice(gr.PRIMAL)])
    assert out[0].shape == (21, 21)
    assert np.array_equal(out[0], out[1])


def test_padding_must_cover_travel_distance():
    e = ex.get_example("riemann-sin2d")
    with pytest.raises(ValueError):
        ex.build(e, 20, 1.0, 0.1, pad_cells=5)
