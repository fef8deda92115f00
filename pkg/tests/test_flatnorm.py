import itertools

import numpy as np
import pytest

from current1d import (Chain1, CubicalComplex, NormedPlane, Polyline,
                       flat_norm, flat_upper_bound_pair, snap)
from current1d.flatnorm import GridError, complex_covering

PL = NormedPlane("l2")


def square_loop(x0, y0, k=1, w=1.0):
    return Chain1.from_segments(PL, [
        ((x0, y0), (x0 + k, y0), w), ((x0 + k, y0), (x0 + k, y0 + 1), w),
        ((x0 + k, y0 + 1), (x0, y0 + 1), w), ((x0, y0 + 1), (x0, y0), w)])


def brute_force_flat_norm(t, cx):
    """Exhaustive oracle over integer face chains s in {-1, 0, 1}^F (unit scale)."""
    d2 = cx.d2_matrix()
    best = np.inf
    for s in itertools.product((-1, 0, 1), repeat=cx.n_faces):
        s = np.array(s, dtype=float)
        r = t - d2 @ s
        best = min(best, cx.h * np.abs(r).sum() + cx.h ** 2 * np.abs(s).sum())
    return best


def random_staircase(rng, steps=4):
    pts = [np.zeros(2)]
    for k in range(steps):
        step = np.array([1.0, 0.0]) if (k + int(rng.integers(0, 2))) % 2 == 0 \
            else np.array([0.0, 1.0])
        pts.append(pts[-1] + step)
    return Polyline(np.array(pts))


class TestComplex:
    def test_d1_d2_zero(self):
        cx = CubicalComplex(h=0.5, nx=4, ny=3)
        assert np.all(cx.d1_matrix() @ cx.d2_matrix() == 0.0)

    def test_counts(self):
        cx = CubicalComplex(h=1.0, nx=3, ny=2)
        assert cx.n_edges == 3 * 3 + 4 * 2
        assert cx.n_faces == 6


class TestSnap:
    def test_single_horizontal_edge(self):
        cx = CubicalComplex(h=1.0, nx=2, ny=2)
        c = Chain1.from_segments(PL, [((0.0, 0.0), (1.0, 0.0), 1.0)])
        t = snap(c, cx)
        assert t[cx.h_edge(0, 0)] == 1.0
        assert np.sum(np.abs(t)) == 1.0

    def test_square_loop_signs(self):
        cx = CubicalComplex(h=1.0, nx=2, ny=2)
        t = snap(square_loop(0, 0), cx)
        assert np.sum(np.abs(t)) == 4.0
        d1 = cx.d1_matrix()
        assert np.all(d1 @ t == 0.0)  # a loop has no boundary

    def test_opposite_segments_cancel(self):
        cx = CubicalComplex(h=1.0, nx=2, ny=1)
        c = Chain1.from_segments(PL, [((0.0, 0.0), (2.0, 0.0), 1.0),
                                      ((2.0, 0.0), (0.0, 0.0), 1.0)])
        assert np.all(snap(c, cx) == 0.0)

    def test_mass_preserved_per_piece(self):
        cx = CubicalComplex(h=0.5, nx=6, ny=2)
        c = Chain1.from_segments(PL, [((0.0, 0.0), (2.5, 0.0), 2.0)])
        t = snap(c, cx)
        assert np.sum(np.abs(t)) * cx.h == pytest.approx(c.mass(), abs=1e-12)

    def test_off_grid_rejected(self):
        cx = CubicalComplex(h=1.0, nx=2, ny=2)
        c = Chain1.from_segments(PL, [((0.25, 0.0), (1.0, 0.0), 1.0)])
        with pytest.raises(GridError):
            snap(c, cx)

    def test_diagonal_rejected(self):
        cx = CubicalComplex(h=1.0, nx=2, ny=2)
        c = Chain1.from_segments(PL, [((0.0, 0.0), (1.0, 1.0), 1.0)])
        with pytest.raises(GridError):
            snap(c, cx)


class TestFlatNorm:
    def test_zero_chain(self):
        cx = CubicalComplex(h=1.0, nx=2, ny=2)
        assert flat_norm(np.zeros(cx.n_edges), cx).value == 0.0

    def test_unit_square_fills_the_face(self):
        cx = CubicalComplex(h=1.0, nx=3, ny=3)
        t = snap(square_loop(1, 1), cx)
        res = flat_norm(t, cx)
        assert res.value == pytest.approx(1.0, abs=1e-8)
        # exhaustive-oracle cross-check at unit scale
        assert res.value == pytest.approx(brute_force_flat_norm(t, cx), abs=1e-8)
        # reconstruction identity
        assert np.max(np.abs(t - (res.r + cx.d2_matrix() @ res.s))) <= 1e-8

    @pytest.mark.parametrize("k", [1, 3, 5, 8])
    def test_thin_rectangles_closed_form(self, k):
        cx = CubicalComplex(h=1.0, nx=k + 2, ny=3)
        t = snap(square_loop(1, 1, k=k), cx)
        assert flat_norm(t, cx).value == pytest.approx(min(2 + 2 * k, k), abs=1e-8)

    def test_value_at_most_mass(self):
        rng = np.random.Generator(np.random.Philox(key=31))
        cx = CubicalComplex(h=1.0, nx=4, ny=4)
        for _ in range(10):
            t = rng.integers(-2, 3, size=cx.n_edges).astype(float)
            res = flat_norm(t, cx)
            assert res.value <= np.abs(t).sum() * cx.h + 1e-8

    def test_subadditive(self):
        rng = np.random.Generator(np.random.Philox(key=32))
        cx = CubicalComplex(h=1.0, nx=4, ny=3)
        for _ in range(10):
            t1 = rng.integers(-1, 2, size=cx.n_edges).astype(float)
            t2 = rng.integers(-1, 2, size=cx.n_edges).astype(float)
            v12 = flat_norm(t1 + t2, cx).value
            assert v12 <= flat_norm(t1, cx).value + flat_norm(t2, cx).value + 1e-7

    def test_face_boundary_costs_at_most_area(self):
        cx = CubicalComplex(h=1.0, nx=3, ny=3)
        d2 = cx.d2_matrix()
        for f in range(cx.n_faces):
            t = d2[:, f].copy()
            assert flat_norm(t, cx).value <= cx.h ** 2 + 1e-8

    def test_mesh_refinement_never_increases(self):
        rng = np.random.Generator(np.random.Philox(key=33))
        for trial in range(20):
            g0 = random_staircase(rng)
            g1 = random_staircase(rng).translate((0.0, float(rng.integers(0, 2))))
            coarse = complex_covering([g0, g1], h=1.0)
            fine = CubicalComplex(origin=coarse.origin, h=0.5,
                                  nx=2 * coarse.nx, ny=2 * coarse.ny)
            diff_c = snap(g0.as_chain(PL), coarse) - snap(g1.as_chain(PL), coarse)
            diff_f = snap(g0.as_chain(PL), fine) - snap(g1.as_chain(PL), fine)
            assert flat_norm(diff_f, fine).value <= flat_norm(diff_c, coarse).value + 1e-7


class TestPairBound:
    def test_equal_curves(self):
        g = Polyline([[0, 0], [1, 0]])
        assert flat_upper_bound_pair(g, g) == 0.0

    def test_parallel_unit_segments(self):
        g0 = Polyline([[0, 0], [1, 0]])
        g1 = Polyline([[0, 0.05], [1, 0.05]])
        assert flat_upper_bound_pair(g0, g1) == pytest.approx(0.2, abs=1e-12)

    def test_bound_dominates_lp_on_aligned_snapped_pairs(self):
        rng = np.random.Generator(np.random.Philox(key=34))
        for _ in range(50):
            g0 = random_staircase(rng)
            g1 = random_staircase(rng).translate((0.0, float(rng.integers(0, 3))))
            cx = complex_covering([g0, g1], h=1.0)
            diff = snap(g0.as_chain(PL), cx) - snap(g1.as_chain(PL), cx)
            lp = flat_norm(diff, cx).value
            assert flat_upper_bound_pair(g0, g1) >= lp - 1e-7
