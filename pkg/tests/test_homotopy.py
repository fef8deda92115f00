import math

import numpy as np
import pytest

from current1d import (AffineBicombing, AffineMap, Chain1, CurrentError,
                       GraphBicombing, MetricGraph, NormedPlane, Polyline,
                       affine_homotopy_current, conical_defect, d_inf,
                       flat_norm, homotopy_fill, interpolate_geodesic, snap,
                       standard_panel)
from current1d.flatnorm import complex_covering
from current1d.homotopy import fill_residual

PL = NormedPlane("l2")
BIC = AffineBicombing(PL)


class TestHomotopyFill:
    def test_equal_curves(self):
        g = Polyline([[0, 0], [1, 0], [1, 1]])
        fill = homotopy_fill(g, g, BIC)
        assert fill.cert_s == 0.0
        assert fill.cert_r == 0.0
        assert fill.r_chain.pieces == ()
        for form in standard_panel(1, count=6, scale=1.0):
            assert fill_residual(g, g, fill, form, PL) <= 1e-9

    def test_unit_square_edges(self):
        g0 = Polyline([[0, 0], [1, 0]])
        g1 = Polyline([[0, 1], [1, 1]])
        fill = homotopy_fill(g0, g1, BIC)
        assert fill.cert_s == pytest.approx(2.0, abs=1e-12)
        assert fill.measured_s == pytest.approx(1.0, abs=1e-6)
        assert fill.cert_r == pytest.approx(2.0, abs=1e-12)
        assert fill.r_chain.mass() == pytest.approx(2.0, abs=1e-12)
        for form in standard_panel(2, count=10, scale=1.5):
            allowed = 1e-6 * (1 + form.lip_pi * form.sup_f)
            assert fill_residual(g0, g1, fill, form, PL) <= allowed

    def test_tent_over_same_endpoints(self):
        g0 = Polyline([[0, 0], [1, 0]])
        g1 = Polyline([[0, 0], [0.5, 0.1], [1, 0]])
        fill = homotopy_fill(g0, g1, BIC)
        assert fill.cert_r == 0.0
        assert fill.cert_s == pytest.approx((1.0 + g1.length) * 0.1, abs=1e-12)
        for form in standard_panel(3, count=10, scale=1.5):
            allowed = 1e-6 * (1 + form.lip_pi * form.sup_f)
            assert fill_residual(g0, g1, fill, form, PL) <= allowed

    def test_certificate_chain_inequality(self):
        rng = np.random.Generator(np.random.Philox(key=41))
        for _ in range(20):
            g0 = Polyline(rng.uniform(-2, 2, size=(3, 2)))
            g1 = Polyline(rng.uniform(-2, 2, size=(4, 2)))
            fill = homotopy_fill(g0, g1, BIC)
            pair = (g0.length + g1.length + 2.0) * d_inf(g0, g1, PL)
            assert fill.cert_s + fill.cert_r <= pair + 1e-9
            assert fill.measured_s <= fill.cert_s + 1e-6
            assert fill.r_chain.mass() <= fill.cert_r + 1e-9

    def test_grid_cross_check_lp_below_certificates(self):
        rng = np.random.Generator(np.random.Philox(key=42))
        for _ in range(10):
            pts = [np.zeros(2)]
            for k in range(4):
                step = [1.0, 0.0] if k % 2 == 0 else [0.0, 1.0]
                pts.append(pts[-1] + np.array(step))
            g0 = Polyline(np.array(pts))
            g1 = g0.translate((0.0, float(rng.integers(0, 3))))
            fill = homotopy_fill(g0, g1, BIC)
            cx = complex_covering([g0, g1], h=1.0)
            diff = snap(g0.as_chain(PL), cx) - snap(g1.as_chain(PL), cx)
            assert flat_norm(diff, cx).value <= fill.cert_s + fill.cert_r + 1e-6


class TestBicombing:
    def test_affine_endpoints(self):
        x, y = np.array([0.0, 1.0]), np.array([2.0, -1.0])
        assert np.allclose(BIC.point(x, y, 0.0), x)
        assert np.allclose(BIC.point(x, y, 1.0), y)

    def test_affine_is_conical(self):
        assert conical_defect(BIC, seed=1, n_samples=200) <= 1e-9

    def test_tree_geodesic_is_conical(self):
        g = MetricGraph(["r", "a", "b", "c", "d"],
                        [(0, 1, 1.0), (0, 2, 2.0), (1, 3, 1.5), (1, 4, 0.5)],
                        ambient="path")
        bic = GraphBicombing(g)
        assert conical_defect(bic, seed=2, n_samples=200) <= 1e-9

    def test_graph_fill_provides_only_r_side(self):
        g = MetricGraph(["a", "b", "c", "d"],
                        [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)],
                        ambient="path")
        bic = GraphBicombing(g)
        fill = homotopy_fill([0, 1], [3, 2], bic)
        assert fill.cert_s is None
        assert fill.cert_r == pytest.approx(2.0, abs=1e-12)
        assert fill.r_chain.mass() <= fill.cert_r + 1e-9
        with pytest.raises(CurrentError):
            fill.boundary_eval(standard_panel(1, count=1)[0])

    def test_deterministic_tie_breaking(self):
        # two equal-length routes 0-1-3 and 0-2-3: predecessor rule picks lower index
        g = MetricGraph(["s", "a", "b", "t"],
                        [(0, 1, 1.0), (0, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)],
                        ambient="path")
        bic = GraphBicombing(g)
        assert bic.path(0, 3) == [0, 1, 3]


class TestAffineHomotopyCurrent:
    def test_equal_maps(self):
        t = Chain1.from_segments(PL, [((0.0, 0.0), (1.0, 0.0), 1.0)])
        phi = AffineMap.identity()
        res = affine_homotopy_current(t, phi, phi, panel=standard_panel(4, count=6))
        assert res.cert_mass == 0.0
        assert res.boundary_residual <= 1e-9

    def test_half_scaling_certificate(self):
        t = Chain1.from_segments(PL, [((0.0, 0.0), (1.0, 0.0), 1.0)])
        res = affine_homotopy_current(t, AffineMap.identity(), AffineMap.scaling(0.5),
                                      panel=standard_panel(5, count=8, scale=1.5))
        assert res.cert_mass == pytest.approx(0.5, abs=1e-8)
        assert res.boundary_residual <= 1e-6

    def test_translation_certificate(self):
        t = Chain1.from_segments(PL, [((0.0, 0.0), (1.0, 1.0), 2.0)])
        w = (0.3, -0.4)
        res = affine_homotopy_current(t, AffineMap.identity(),
                                      AffineMap.translation(w),
                                      panel=standard_panel(6, count=8, scale=2.0))
        assert res.cert_mass == pytest.approx(2.0 * 0.5 * t.mass(), abs=1e-8)
        assert res.boundary_residual <= 1e-6

    def test_rejects_non_affine(self):
        t = Chain1.from_segments(PL, [((0.0, 0.0), (1.0, 0.0), 1.0)])
        with pytest.raises(CurrentError):
            affine_homotopy_current(t, AffineMap.identity(), "not a map")

    def test_fuzzed_boundary_identity(self):
        rng = np.random.Generator(np.random.Philox(key=43))
        panel = standard_panel(44, count=6, scale=2.0)
        for _ in range(10):
            pts = rng.uniform(-1.5, 1.5, size=(3, 2))
            t = Chain1.from_segments(PL, [
                (tuple(pts[0]), tuple(pts[1]), float(rng.normal())),
                (tuple(pts[1]), tuple(pts[2]), float(rng.normal()))])
            phi = AffineMap(a=((1.0 + 0.1 * rng.normal(), 0.1 * rng.normal()),
                               (0.1 * rng.normal(), 1.0 + 0.1 * rng.normal())),
                            b=tuple(0.3 * rng.normal(size=2)))
            res = affine_homotopy_current(t, phi, AffineMap.identity(), panel=panel)
            assert res.boundary_residual <= 1e-6


class TestInterpolation:
    def test_single_segment_any_partition(self):
        g = Polyline([[0, 0], [2, 0]])
        res = interpolate_geodesic(g, [0.0, 0.3, 0.8, 1.0])
        assert res.chain.mass() == pytest.approx(g.length, abs=1e-12)
        assert res.d_inf <= 1e-12

    def test_semicircle_chords_strictly_shorter(self):
        theta = np.linspace(0, math.pi, 17)
        g = Polyline(np.stack([np.cos(theta), np.sin(theta)], axis=1))
        res = interpolate_geodesic(g, np.linspace(0, 1, 5))
        assert res.chain.mass() < g.length

    def test_nested_partitions_monotone(self):
        theta = np.linspace(0, math.pi, 17)
        g = Polyline(np.stack([np.cos(theta), np.sin(theta)], axis=1))
        masses = []
        for k in (2, 4, 8, 16, 32):
            res = interpolate_geodesic(g, np.linspace(0, 1, k + 1))
            masses.append(res.chain.mass())
            assert res.chain.mass() <= g.length + 1e-12
        assert all(masses[i] <= masses[i + 1] + 1e-12 for i in range(len(masses) - 1))

    def test_malformed_partition_rejected(self):
        g = Polyline([[0, 0], [1, 0]])
        with pytest.raises(CurrentError):
            interpolate_geodesic(g, [0.2, 0.5, 1.0])
        with pytest.raises(CurrentError):
            interpolate_geodesic(g, [0.0, 0.5, 0.5, 1.0])
