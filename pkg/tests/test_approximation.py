import math

import numpy as np
import pytest

from current1d import (CurveMeasure, NormedPlane, Polyline, approximate,
                       cluster, flat_norm, snap, truncate)
from current1d.approximation import measure_as_chain
from current1d.flatnorm import CubicalComplex

PL = NormedPlane("l2")


def seg(y, x0=0.0, x1=1.0):
    return Polyline([[x0, y], [x1, y]])


class TestTruncate:
    def test_all_short_is_identity(self):
        cm = CurveMeasure.of([(1.0, seg(0.0)), (2.0, seg(1.0))])
        out, err = truncate(cm, 2.0)
        assert out.entries == cm.entries
        assert err == 0.0

    def test_single_long_curve_dropped(self):
        cm = CurveMeasure.of([(0.5, Polyline([[0, 0], [4, 0]]))])
        out, err = truncate(cm, 2.0)
        assert out.entries == ()
        assert err == pytest.approx(0.5 * 4.0, abs=1e-12)

    def test_mixed_error_is_dropped_mass(self):
        cm = CurveMeasure.of([(1.0, seg(0.0)), (2.0, Polyline([[0, 0], [3, 0]])),
                              (0.25, Polyline([[0, 0], [5, 0]]))])
        out, err = truncate(cm, 1.5)
        assert len(out.entries) == 1
        assert err == pytest.approx(2.0 * 3.0 + 0.25 * 5.0, abs=1e-12)


class TestCluster:
    def test_single_curve_singleton(self):
        cm = CurveMeasure.of([(1.0, seg(0.0))])
        cl = cluster(cm, 0.1)
        assert len(cl) == 1
        assert cl[0].members == (0,)
        assert cl[0].diameter == 0.0

    def test_two_parallel_segments_merge(self):
        cm = CurveMeasure.of([(1.0, seg(0.0)), (1.0, seg(0.05))])
        cl = cluster(cm, 0.1)
        assert len(cl) == 1
        assert cl[0].representative == 0  # equal lengths, lowest index wins
        assert cl[0].diameter == pytest.approx(0.05, abs=1e-15)

    def test_separated_curves_stay_singletons(self):
        eps = 0.1
        cm = CurveMeasure.of([(1.0, seg(0.0)), (1.0, seg(3 * eps))])
        cl = cluster(cm, eps)
        assert len(cl) == 2
        assert all(c.diameter == 0.0 for c in cl)

    def test_representative_is_shortest_member(self):
        tent = Polyline([[0, 0], [0.5, 0.04], [1, 0]])  # longer than the segment
        cm = CurveMeasure.of([(1.0, tent), (1.0, seg(0.0))])
        cl = cluster(cm, 0.1)
        assert len(cl) == 1
        assert cl[0].representative == 1


class TestApproximate:
    def test_single_segment_exact(self):
        cm = CurveMeasure.of([(2.0, seg(0.0))])
        p, cert = approximate(cm, eps=0.3, mesh=0.25)
        assert p.mass() == pytest.approx(2.0, abs=1e-12)
        assert cert.flat_bound == 0.0

    def test_two_parallel_unit_segments(self):
        cm = CurveMeasure.of([(1.0, seg(0.0)), (1.0, seg(0.05))])
        p, cert = approximate(cm, eps=0.1, mesh=0.5)
        assert p.mass() == pytest.approx(2.0, abs=1e-12)
        assert cert.mass_n == pytest.approx(2.0, abs=1e-12)
        assert cert.clustering_term == pytest.approx(0.4, abs=1e-12)
        assert cert.interpolation_term == 0.0
        # LP ground truth on the h = 0.05 grid: fills the sliver for 0.15 <= 0.4
        cx = CubicalComplex(origin=(0.0, 0.0), h=0.05, nx=20, ny=2)
        diff = snap(measure_as_chain(cm, PL), cx) - snap(p, cx)
        lp = flat_norm(diff, cx)
        assert lp.value == pytest.approx(0.15, abs=1e-8)
        assert lp.value <= cert.flat_bound + 1e-6

    def test_semicircle_mesh_halving_decreases_bound(self):
        theta = np.linspace(0, math.pi, 33)
        arc = Polyline(np.stack([np.cos(theta), np.sin(theta)], axis=1))
        cm = CurveMeasure.of([(1.0, arc)])
        bounds = []
        for mesh in (0.5, 0.25, 0.125, 0.0625):
            p, cert = approximate(cm, eps=0.1, mesh=mesh)
            bounds.append(cert.flat_bound)
            assert p.mass() <= cm.induced_mass + 1e-9
            assert cert.clustering_term == 0.0
        assert all(bounds[i] >= bounds[i + 1] - 1e-12 for i in range(len(bounds) - 1))

    def test_mass_never_increases(self):
        rng = np.random.Generator(np.random.Philox(key=51))
        for _ in range(20):
            entries = []
            for _ in range(int(rng.integers(1, 12))):
                n = int(rng.integers(2, 5))
                entries.append((float(rng.uniform(0.1, 2.0)),
                                Polyline(rng.uniform(-2, 2, size=(n, 2)))))
            cm = CurveMeasure.of(entries)
            p, cert = approximate(cm, eps=float(rng.uniform(0.05, 1.0)),
                                  mesh=float(rng.uniform(0.1, 0.5)))
            assert p.mass() <= cm.induced_mass + 1e-9
            assert cert.mass_p == pytest.approx(p.mass(), abs=1e-12)

    def test_deterministic_bit_for_bit(self):
        cm = CurveMeasure.of([(1.0, seg(0.0)), (1.5, seg(0.03)), (0.5, seg(0.4))])
        p1, c1 = approximate(cm, eps=0.1, mesh=0.25)
        p2, c2 = approximate(cm, eps=0.1, mesh=0.25)
        assert p1.pieces == p2.pieces
        assert c1 == c2

    def test_rejects_bad_parameters(self):
        cm = CurveMeasure.of([(1.0, seg(0.0))])
        with pytest.raises(Exception):
            approximate(cm, eps=0.0, mesh=0.25)
        with pytest.raises(Exception):
            approximate(cm, eps=0.1, mesh=0.0)
        with pytest.raises(Exception):
            CurveMeasure.of([(0.0, seg(0.0))])
