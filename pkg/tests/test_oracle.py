import math

import numpy as np
import pytest

from hermite_hj import grid as gr
from hermite_hj import oracle as orc


class TestLaxHopf:
    def test_small_time_limit(self):
        t = 1e-6
        x = np.linspace(0, 2 * np.pi, 7)
        u = orc.burgers1d_exact(x, t)
        # u = g - t H(g') + O(t^2); the linear term alone is up to 5e-7 here
        assert np.allclose(u, np.sin(x) - 0.5 * t * np.cos(x) ** 2, rtol=0,
                           atol=1e-8)
        assert np.max(np.abs(u - np.sin(x))) <= 0.5 * t + 1e-12

    def test_zero_time_returns_data(self):
        x = np.array([0.3, 1.1])
        assert np.array_equal(orc.lax_hopf_1d(np.sin, lambda v: v * v, x, 0.0, 1.0),
                              np.sin(x))

    def test_negative_time(self):
        with pytest.raises(orc.OracleValidityError):
            orc.lax_hopf_1d(np.sin, lambda v: v * v, 0.0, -1.0, 1.0)

    def test_scan_doubling_is_stable(self):
        g, L = np.sin, lambda v: 0.5 * v * v
        a = orc.lax_hopf_1d(g, L, 1.0, 0.5, 0.55, samples=4096)
        b = orc.lax_hopf_1d(g, L, 1.0, 0.5, 0.55, samples=8192)
        assert abs(a[0] - b[0]) < 1e-10

    def test_monotone_under_refinement(self):
        g, L = np.sin, lambda v: 0.5 * v * v
        xs = np.linspace(0, 2 * np.pi, 9)
        prev = None
        for samples in (65, 257, 1025):  # nested scans
            u = orc.lax_hopf_1d(g, L, xs, 1.5, 1.6, samples=samples, refine=0)
            if prev is not None:
                assert np.all(u <= prev)
            prev = u

    def test_burgers_smooth_matches_characteristics(self):
        # before the kink, u = sin(x0) + t cos(x0)^2 / 2 with x = x0 + t cos(x0)
        t = 0.5
        x0 = np.linspace(0.1, 6.0, 11)
        x = x0 + t * np.cos(x0)
        want = np.sin(x0) + 0.5 * t * np.cos(x0) ** 2
        assert np.allclose(orc.burgers1d_exact(x, t), want, rtol=0, atol=1e-12)


class TestEikonal:
    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
    def test_at_peak(self, t):
        assert orc.eikonal1d_exact(np.pi / 2, t) == pytest.approx(math.cos(t),
                                                                  abs=1e-15)

    def test_trough_covered(self):
        assert orc.eikonal1d_exact(1.5 * np.pi + 0.5, 1.0) == -1.0

    def test_against_dense_minimum(self):
        x = np.linspace(0, 2 * np.pi, 13)
        t = 0.8
        dense = [np.min(np.sin(np.linspace(v - t, v + t, 200001))) for v in x]
        assert np.allclose(orc.eikonal1d_exact(x, t), dense, atol=1e-9)


class TestNoncvxCos:
    def test_zero_time(self):
        x = np.linspace(-1, 1, 9)
        assert np.allclose(orc.noncvx_cos_exact(x, 0.0), -np.cos(np.pi * x),
                           atol=1e-15)

    def test_residual(self):
        t = 0.5 / np.pi ** 2
        for x in np.linspace(-1, 1, 21):
            x0 = orc.noncvx_cos_foot(x, t)
            assert abs(orc._e3_residual(x0, x, t)) < 1e-12

    def test_window(self):
        spec = orc.get_oracle("noncvx-cos")
        assert spec.valid(0.5 / np.pi ** 2)
        with pytest.raises(orc.OracleValidityError):
            spec(np.array([0.0]), 1.0 / np.pi ** 2)

    def test_multiple_feet_rejected(self):
        with pytest.raises(orc.OracleValidityError):
            orc.noncvx_cos_foot(0.3, 0.5)


class TestXY:
    def test_zero_time(self):
        x, y = np.meshgrid(np.linspace(-3, 3, 5), np.linspace(-3, 3, 4))
        assert np.allclose(orc.xy_nonconvex_exact(x, y, 0.0),
                           np.sin(x) + np.cos(y), atol=1e-15)

    def test_residual(self):
        rng = np.random.default_rng(3)
        x, y = rng.uniform(-np.pi, np.pi, (2, 50))
        t = 0.5
        x0, y0 = orc.xy_feet(x, y, t)
        assert np.max(np.abs(x0 - t * np.sin(y0) - x)) < 1e-12
        assert np.max(np.abs(y0 + t * np.cos(x0) - y)) < 1e-12

    def test_window(self):
        with pytest.raises(orc.OracleValidityError):
            orc.get_oracle("xy-nonconvex")(0.0, 0.0, 0.6)


class TestRiemannQuartic:
    @pytest.mark.parametrize("t", [0.25, 0.5, 1.0])
    def test_origin(self, t):
        v = np.linspace(-2, 2, 400001)
        assert np.max(orc.quartic_flux(v)) == pytest.approx(1.0, abs=1e-12)
        assert orc.riemann_quartic_exact(0.0, t)[0] == pytest.approx(-t, abs=1e-14)

    def test_zero_time(self):
        x = np.linspace(-1, 1, 9)
        assert np.array_equal(orc.riemann_quartic_exact(x, 0.0), -2 * np.abs(x))

    def test_even(self):
        x = np.random.default_rng(4).uniform(0, 1, 40)
        t = 1.0
        assert np.allclose(orc.riemann_quartic_exact(x, t),
                           orc.riemann_quartic_exact(-x, t), rtol=0, atol=1e-14)

    def test_against_dense_minimum(self):
        v = np.linspace(-2, 2, 200001)
        t = 0.7
        for x in np.linspace(-1, 1, 11):
            dense = t * np.min((x / t) * v - orc.quartic_flux(v))
            assert orc.riemann_quartic_exact(x, t)[0] == pytest.approx(dense,
                                                                       abs=1e-9)


class TestBurgers2D:
    def test_reduces_along_diagonal(self):
        t = 0.1
        x = np.array([[0.4, 1.0]])
        y = np.array([[1.2, 0.6]])
        u = orc.burgers2d_exact(x, y, t)
        z = 0.5 * (x + y)
        ref = orc.lax_hopf_1d(lambda s: -np.cos(2 * s), lambda v: 0.5 * v * v,
                              z.ravel(), t, 0.3)
        assert np.allclose(u.ravel(), ref)
        assert u[0, 0] == pytest.approx(u[0, 1], abs=1e-15)

    def test_zero_time(self):
        x, y = np.meshgrid([0.0, 1.0], [0.5, 2.0])
        assert np.allclose(orc.burgers2d_exact(x, y, 0.0), -np.cos(x + y))


class TestNorms:
    def test_exact_field(self):
        grid = gr.GridSpec((0, 2 * np.pi), (10,))
        x = grid.coords(gr.PRIMAL)
        poly = np.zeros((10, 4))
        poly[:, 0] = orc.eikonal1d_exact(x, 0.3)
        field = gr.NodeField(gr.PRIMAL, 1, poly)
        assert orc.error_norms(field, orc.get_oracle("eikonal1d"), grid,
                               0.3) == (0.0, 0.0, 0.0)

    def test_single_node(self):
        h, eps = 0.25, 3e-3
        e = np.zeros(8)
        e[5] = eps
        L1, L2, Linf = orc.norms(e, h, 1)
        assert L1 == pytest.approx(h * eps)
        assert L2 == pytest.approx(math.sqrt(h) * eps)
        assert Linf == eps

    def test_area_weight_in_2d(self):
        e = np.full((4, 4), 2.0)
        L1, L2, Linf = orc.norms(e, (0.5, 0.25), 2)
        assert (L1, Linf) == (0.125 * 32, 2.0)
        assert L2 == pytest.approx(math.sqrt(0.125 * 64))

    def test_rejects_invalid_time(self):
        grid = gr.GridSpec((-np.pi, np.pi, -np.pi, np.pi), (4, 4))
        field = gr.NodeField(gr.PRIMAL, 1, np.zeros((4, 4, 4, 4)))
        with pytest.raises(orc.OracleValidityError):
            orc.error_norms(field, orc.get_oracle("xy-nonconvex"), grid, 1.0)

    def test_registry(self):
        assert orc.get_oracle("riemann-sin2d") is None
        assert orc.get_oracle("optimal-control") is None
        assert {s.method for s in orc.ORACLES.values()} == {
            "lax_hopf", "characteristics", "fixed_point", "riemann_min"}
