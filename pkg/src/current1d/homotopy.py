"""Bicombing homotopies: certified fillings of curve pairs, the affine-homotopy
current of chain pushforwards, and piecewise-geodesic interpolation.

The 2-dimensional filling S is never materialized as data. It exists as a weak
evaluator (adaptive tensor Simpson quadrature over the homotopy square), since
it is only ever needed through its boundary action and its mass bounds. The
contractual quantities are the certificates certS = (l0 + l1) d_inf and
certR = d(starts) + d(ends); the quadrature mass is a reported estimate.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .currents import (AffineMap, Chain1, CurrentError, Polyline,
                       ScalarField, TestForm, d_inf, evaluate, pushforward)
from .spaces import MetricGraph, NormedPlane

QUAD_TOL = 1e-8
MAX_PANELS = 2 ** 14


def _as_field(f, plane: NormedPlane) -> ScalarField:
    if isinstance(f, ScalarField):
        return f
    return ScalarField("const", (float(f),), plane)


# ---------------------------------------------------------------------------
# 2D Simpson quadrature with panel doubling


def _simpson_weights(n: int) -> np.ndarray:
    w = np.ones(n + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w / 3.0


def _simpson2d(fn, sa, sb, ta, tb, ns, nt) -> float:
    s = np.linspace(sa, sb, ns + 1)
    t = np.linspace(ta, tb, nt + 1)
    vals = fn(s, t)
    ws = _simpson_weights(ns) * (sb - sa) / ns
    wt = _simpson_weights(nt) * (tb - ta) / nt
    return float(ws @ vals @ wt)


def _integrate_cell(fn, sa, sb, ta=0.0, tb=1.0, tol=QUAD_TOL, n0=4) -> float:
    ns = nt = n0
    prev = _simpson2d(fn, sa, sb, ta, tb, ns, nt)
    while ns * nt < MAX_PANELS:
        ns *= 2
        nt *= 2
        cur = _simpson2d(fn, sa, sb, ta, tb, ns, nt)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


def _integrate_1d(fn, a=0.0, b=1.0, tol=QUAD_TOL, n0=16) -> float:
    n = n0
    t = np.linspace(a, b, n + 1)
    prev = float((_simpson_weights(n) * (b - a) / n) @ fn(t))
    while n < MAX_PANELS:
        n *= 2
        t = np.linspace(a, b, n + 1)
        cur = float((_simpson_weights(n) * (b - a) / n) @ fn(t))
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return prev


# ---------------------------------------------------------------------------
# bicombings


@dataclass(frozen=True)
class AffineBicombing:
    """sigma(x, y, t) = (1-t) x + t y on a normed plane; conical exactly."""

    plane: NormedPlane

    tag = "affine"

    def point(self, x, y, t: float):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        return (1.0 - t) * x + t * y

    def dist(self, p, q) -> float:
        return self.plane.dist(p, q)


class GraphBicombing:
    """Shortest-path selection on a metric graph, ties by lowest-index predecessor.

    Generic graphs need not satisfy the conical inequality; it is only
    sample-checked, and the quantitative S bounds are disabled on graphs.
    """

    tag = "graphGeodesic"

    def __init__(self, g: MetricGraph):
        self.g = g
        self._paths: dict[int, tuple[list[float], list[int]]] = {}

    def _sssp(self, src: int):
        if src in self._paths:
            return self._paths[src]
        g = self.g
        adj: list[list[tuple[int, float]]] = [[] for _ in range(g.n)]
        for u, v, w in g.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        for lst in adj:
            lst.sort()
        dist = [math.inf] * g.n
        pred = [-1] * g.n
        dist[src] = 0.0
        heap = [(0.0, src)]
        while heap:
            du, u = heapq.heappop(heap)
            if du > dist[u] + 1e-15:
                continue
            for v, w in adj[u]:
                nd = du + w
                if nd < dist[v] - 1e-12:
                    dist[v] = nd
                    pred[v] = u
                    heapq.heappush(heap, (nd, v))
                elif abs(nd - dist[v]) <= 1e-12 and pred[v] >= 0 and u < pred[v]:
                    pred[v] = u
        self._paths[src] = (dist, pred)
        return dist, pred

    def path(self, u: int, v: int) -> list[int]:
        dist, pred = self._sssp(u)
        if not math.isfinite(dist[v]):
            raise CurrentError(f"vertices {u}, {v} are disconnected")
        out = [v]
        while out[-1] != u:
            out.append(pred[out[-1]])
        return out[::-1]

    def geodesic_chain(self, u: int, v: int, weight: float = 1.0) -> Chain1:
        p = self.path(u, v)
        return Chain1.from_graph_edges(self.g, [(p[i], p[i + 1], weight)
                                                for i in range(len(p) - 1)])

    def point(self, u: int, v: int, t: float):
        """Position descriptor (a, b, offset) at fraction t along the geodesic."""
        p = self.path(u, v)
        lens = [self.g.path_dist[p[i], p[i + 1]] for i in range(len(p) - 1)]
        total = sum(lens)
        if total == 0.0:
            return (u, u, 0.0)
        target = t * total
        acc = 0.0
        for i, ln in enumerate(lens):
            if target <= acc + ln or i == len(lens) - 1:
                return (p[i], p[i + 1], max(0.0, min(ln, target - acc)))
            acc += ln
        return (p[-1], p[-1], 0.0)

    def dist(self, pos1, pos2) -> float:
        """Intrinsic distance between two edge-interior position descriptors."""
        (a1, b1, o1), (a2, b2, o2) = pos1, pos2
        l1 = self.g.path_dist[a1, b1] if a1 != b1 else 0.0
        l2 = self.g.path_dist[a2, b2] if a2 != b2 else 0.0
        best = math.inf
        if (a1, b1) == (a2, b2):
            best = abs(o1 - o2)
        if (a1, b1) == (b2, a2):
            best = min(best, abs(o1 - (l2 - o2)))
        d = self.g.path_dist
        for xv, xo in ((a1, o1), (b1, l1 - o1)):
            for yv, yo in ((a2, o2), (b2, l2 - o2)):
                best = min(best, xo + d[xv, yv] + yo)
        return float(best)


Bicombing = Union[AffineBicombing, GraphBicombing]


def conical_defect(bic: Bicombing, seed: int = 0, n_samples: int = 1000,
                   t_grid: int = 9, scale: float = 2.0) -> float:
    """Max sampled violation of d(s_xy(t), s_x'y'(t)) <= (1-t)d(x,x') + t d(y,y')."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    worst = 0.0
    ts = np.linspace(0.0, 1.0, t_grid)
    for _ in range(n_samples):
        if bic.tag == "affine":
            x, y, x2, y2 = rng.uniform(-scale, scale, size=(4, 2))
            for t in ts:
                lhs = bic.dist(bic.point(x, y, t), bic.point(x2, y2, t))
                rhs = (1 - t) * bic.dist(x, x2) + t * bic.dist(y, y2)
                worst = max(worst, lhs - rhs)
        else:
            n = bic.g.n
            x, y, x2, y2 = rng.integers(0, n, size=4)
            if not (math.isfinite(bic.g.path_dist[x, y])
                    and math.isfinite(bic.g.path_dist[x2, y2])
                    and math.isfinite(bic.g.path_dist[x, x2])
                    and math.isfinite(bic.g.path_dist[y, y2])):
                continue
            for t in ts:
                lhs = bic.dist(bic.point(x, y, t), bic.point(x2, y2, t))
                rhs = ((1 - t) * bic.g.path_dist[x, x2] + t * bic.g.path_dist[y, y2])
                worst = max(worst, lhs - rhs)
    return float(worst)


# ---------------------------------------------------------------------------
# homotopy fill of a curve pair


def _poly_derivs(poly: Polyline) -> tuple[np.ndarray, np.ndarray]:
    """Breakpoints and per-interval parameter derivatives of a constant-speed polyline."""
    if poly.length == 0.0 or len(poly.points) < 2:
        return np.array([0.0, 1.0]), np.zeros((1, 2))
    br = poly.breaks()
    keep = np.concatenate([[True], np.diff(br) > 0])
    br = br[keep]
    pts = poly.points[keep]
    d = np.diff(pts, axis=0) / np.diff(br)[:, None]
    return br, d


def _deriv_in_cell(br: np.ndarray, d: np.ndarray, sa: float, sb: float) -> np.ndarray:
    """Constant parameter derivative on a cell strictly inside one interval."""
    mid = 0.5 * (sa + sb)
    idx = int(np.clip(np.searchsorted(br, mid, side="right") - 1, 0, len(d) - 1))
    return d[idx]


@dataclass(frozen=True)
class FillResult:
    s_evaluator: Optional[Callable] = field(repr=False, default=None)
    r_chain: Chain1 = None
    cert_s: Optional[float] = None
    cert_r: float = 0.0
    measured_s: Optional[float] = None
    measured_r: float = 0.0
    d_inf: float = 0.0

    def boundary_eval(self, form: TestForm) -> float:
        """dS(f, pi) = S(1, f, pi)."""
        if self.s_evaluator is None:
            raise CurrentError("quantitative S evaluator is disabled for graph bicombings")
        return self.s_evaluator(1.0, form.f, form.pi)


def homotopy_fill(g0, g1, bic: Bicombing, quad_tol: float = QUAD_TOL) -> FillResult:
    """Fill the difference of two curves: [g0] - [g1] = dS + R.

    With the affine bicombing, S = H_*(e1^e2 [0,1]^2) for the linear homotopy
    H(s,t) between the constant-speed curves, exposed as a weak evaluator; R is
    the chain of the two endpoint geodesics. Graph bicombings provide only the
    R side (certR and the geodesic chain).
    """
    if isinstance(bic, GraphBicombing):
        u0, v0 = int(g0[0]), int(g1[0])
        u1, v1 = int(g0[-1]), int(g1[-1])
        r = bic.geodesic_chain(u0, v0, 1.0) + bic.geodesic_chain(u1, v1, -1.0)
        cert_r = float(bic.g.path_dist[u0, v0] + bic.g.path_dist[u1, v1])
        return FillResult(s_evaluator=None, r_chain=r, cert_s=None, cert_r=cert_r,
                          measured_s=None, measured_r=r.mass())

    plane = bic.plane
    if not isinstance(g0, Polyline) or not isinstance(g1, Polyline):
        raise CurrentError("affine homotopy fill expects polylines")
    dinf = d_inf(g0, g1, plane)
    cert_s = (g0.length + g1.length) * dinf
    cert_r = plane.dist(g0.start(), g1.start()) + plane.dist(g0.end(), g1.end())
    r_segs = [(a, b, w) for a, b, w in ((g0.start(), g1.start(), 1.0),
                                        (g0.end(), g1.end(), -1.0)) if a != b]
    r = Chain1.from_segments(plane, r_segs)

    br0, d0 = _poly_derivs(g0)
    br1, d1 = _poly_derivs(g1)
    cells = np.union1d(br0, br1)
    spans = [(float(cells[i]), float(cells[i + 1])) for i in range(len(cells) - 1)
             if cells[i + 1] - cells[i] > 1e-14]

    def make_partials(sa: float, sb: float):
        v0 = _deriv_in_cell(br0, d0, sa, sb)
        v1 = _deriv_in_cell(br1, d1, sa, sb)

        def partials(s: np.ndarray, t: np.ndarray):
            p0 = g0.at(s)
            p1 = g1.at(s)
            tt = t[None, :, None]
            h = (1 - tt) * p0[:, None, :] + tt * p1[:, None, :]
            d1h = (1 - tt) * v0[None, None, :] + tt * v1[None, None, :]
            d1h = np.broadcast_to(d1h, h.shape)
            d2h = np.broadcast_to((p1 - p0)[:, None, :], h.shape)
            return h, d1h, d2h
        return partials

    cell_partials = [(sa, sb, make_partials(sa, sb)) for sa, sb in spans]

    def s_evaluator(f, pi1: ScalarField, pi2: ScalarField) -> float:
        ff = _as_field(f, plane)
        ncells = max(1, len(cell_partials))
        total = 0.0
        for sa, sb, partials in cell_partials:
            def cell_fn(s, t):
                h, d1h, d2h = partials(s, t)
                shp = h.shape[:2]
                pts = h.reshape(-1, 2)
                gp1 = pi1.grad(pts)
                gp2 = pi2.grad(pts)
                g1v = np.einsum("ij,ij->i", gp1, d1h.reshape(-1, 2)).reshape(shp)
                g2v = np.einsum("ij,ij->i", gp2, d2h.reshape(-1, 2)).reshape(shp)
                g1w = np.einsum("ij,ij->i", gp1, d2h.reshape(-1, 2)).reshape(shp)
                g2w = np.einsum("ij,ij->i", gp2, d1h.reshape(-1, 2)).reshape(shp)
                return ff.value(pts).reshape(shp) * (g1v * g2v - g1w * g2w)
            total += _integrate_cell(cell_fn, sa, sb, tol=quad_tol / ncells)
        return total

    measured = 0.0
    for sa, sb, partials in cell_partials:
        def measured_fn(s, t):
            _, d1h, d2h = partials(s, t)
            return np.abs(d1h[..., 0] * d2h[..., 1] - d1h[..., 1] * d2h[..., 0])
        measured += _integrate_cell(measured_fn, sa, sb,
                                    tol=quad_tol / max(1, len(cell_partials)))

    return FillResult(s_evaluator=s_evaluator, r_chain=r, cert_s=cert_s,
                      cert_r=cert_r, measured_s=measured, measured_r=r.mass(),
                      d_inf=dinf)


def fill_residual(g0: Polyline, g1: Polyline, fill: FillResult, form: TestForm,
                  plane: NormedPlane) -> float:
    """|[g0](f,pi) - [g1](f,pi) - dS(f,pi) - R(f,pi)| for one panel form."""
    lhs = (evaluate(g0.as_chain(plane), form, plane)
           - evaluate(g1.as_chain(plane), form, plane))
    rhs = fill.boundary_eval(form) + evaluate(fill.r_chain, form, plane)
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# affine homotopy current H_h(T) for chain pushforwards (k = 1)


@dataclass(frozen=True)
class HomotopyCurrentResult:
    h_evaluator: Callable = field(repr=False, default=None)
    h_boundary_evaluator: Callable = field(repr=False, default=None)
    cert_mass: float = 0.0
    boundary_residual: float = 0.0


def affine_homotopy_current(t_chain: Chain1, phi: AffineMap, psi: AffineMap,
                            panel: Optional[Sequence[TestForm]] = None,
                            quad_tol: float = QUAD_TOL) -> HomotopyCurrentResult:
    """The homotopy 2-current H(T) between two affine pushforwards of a chain.

    Realizes phi_# T - psi_# T = dH(T) + H(dT) weakly, with the certified mass
    bound 2 * int |phi - psi| max(Lip phi, Lip psi) d|T| (k = 1 instance; the
    pointwise Lipschitz constant of an affine map is its operator norm).
    """
    if not isinstance(phi, AffineMap) or not isinstance(psi, AffineMap):
        raise CurrentError("homotopy current needs affine maps")
    plane = t_chain.space if isinstance(t_chain.space, NormedPlane) else NormedPlane("l2")
    dm, db = phi.displacement(psi)
    maxop = max(phi.op_norm(plane), psi.op_norm(plane))
    aphi, apsi = phi.matrix(), psi.matrix()
    bphi, bpsi = np.asarray(phi.b), np.asarray(psi.b)

    segs = []
    for p in t_chain.pieces:
        a = np.asarray(t_chain.coords_of(p.start))
        b = np.asarray(t_chain.coords_of(p.end))
        segs.append((a, b - a, p.weight, p.length))

    cert = 0.0
    for a, d, w, ln in segs:
        def disp_norm(ss):
            pts = a[None, :] + ss[:, None] * d[None, :]
            return plane.norm_arr(pts @ dm.T + db)
        cert += abs(w) * ln * _integrate_1d(disp_norm, tol=quad_tol)
    cert *= 2.0 * maxop

    def h_mid(pts: np.ndarray, tt: np.ndarray) -> np.ndarray:
        """h(t, x) = t phi(x) + (1-t) psi(x); pts (n,2), tt (n,)."""
        return (tt[:, None] * (pts @ aphi.T + bphi)
                + (1 - tt)[:, None] * (pts @ apsi.T + bpsi))

    def h_evaluator(f, pi1: ScalarField, pi2: ScalarField) -> float:
        ff = _as_field(f, plane)
        total = 0.0
        for a, d, w, _ in segs:
            def cell_fn(s, t):
                pts = a[None, :] + s[:, None] * d[None, :]
                n_s, n_t = len(s), len(t)
                p_flat = np.repeat(pts, n_t, axis=0)
                t_flat = np.tile(t, n_s)
                y = h_mid(p_flat, t_flat)
                delta = p_flat @ dm.T + db
                a_t = t_flat[:, None, None] * aphi + (1 - t_flat)[:, None, None] * apsi
                ad = np.einsum("nij,j->ni", a_t, d)
                g1 = pi1.grad(y)
                g2 = pi2.grad(y)
                term = (np.einsum("ni,ni->n", g1, delta) * np.einsum("ni,ni->n", g2, ad)
                        - np.einsum("ni,ni->n", g2, delta) * np.einsum("ni,ni->n", g1, ad))
                return (ff.value(y) * term).reshape(n_s, n_t)
            total += w * _integrate_cell(cell_fn, 0.0, 1.0, tol=quad_tol)
        return total

    def h_boundary_evaluator(form: TestForm) -> float:
        """H(dT)(f, pi): the 0-current instance of the defining t-integral."""
        m = t_chain.boundary()
        total = 0.0
        for p, w in m.atoms:
            x = np.asarray(t_chain.coords_of(p) if not isinstance(p, tuple) else p)
            delta = dm @ x + db

            def fn(tt):
                y = h_mid(np.tile(x, (len(tt), 1)), tt)
                return form.f.value(y) * np.einsum("ni,i->n", form.pi.grad(y), delta)
            total += w * _integrate_1d(fn, tol=quad_tol)
        return total

    residual = 0.0
    if panel:
        for form in panel:
            lhs = (evaluate(pushforward(t_chain, phi), form, plane)
                   - evaluate(pushforward(t_chain, psi), form, plane))
            rhs = h_evaluator(1.0, form.f, form.pi) + h_boundary_evaluator(form)
            residual = max(residual, abs(lhs - rhs))

    return HomotopyCurrentResult(h_evaluator=h_evaluator,
                                 h_boundary_evaluator=h_boundary_evaluator,
                                 cert_mass=cert, boundary_residual=residual)


# ---------------------------------------------------------------------------
# piecewise-geodesic interpolation (chords of a partition)


@dataclass(frozen=True)
class InterpolationResult:
    chain: Chain1
    chord_polyline: Polyline
    d_inf: float


def interpolate_geodesic(poly: Polyline, partition: Sequence[float],
                         plane: Optional[NormedPlane] = None) -> InterpolationResult:
    """Chord chain through gamma(t_j); total chord length never exceeds l(gamma).

    d_inf is computed against the partition-aligned parametrization of the
    chord curve (each cell [t_{j-1}, t_j] maps affinely onto its chord), which
    is exact on the merged breakpoints.
    """
    plane = plane or NormedPlane("l2")
    part = np.asarray(sorted(partition), dtype=float)
    if part[0] != 0.0 or part[-1] != 1.0 or np.any(np.diff(part) <= 0):
        raise CurrentError("partition must be strictly increasing from 0 to 1")
    nodes = poly.at(part)
    segs = [(nodes[i], nodes[i + 1], 1.0) for i in range(len(part) - 1)
            if not np.array_equal(nodes[i], nodes[i + 1])]
    chain = Chain1.from_segments(plane, segs)

    ts = np.union1d(poly.breaks(), part)
    idx = np.clip(np.searchsorted(part, ts, side="right") - 1, 0, len(part) - 2)
    t0 = part[idx]
    t1 = part[idx + 1]
    lam = (ts - t0) / (t1 - t0)
    chord_pts = nodes[idx] + lam[:, None] * (nodes[idx + 1] - nodes[idx])
    dinf = float(np.max(plane.norm_arr(poly.at(ts) - chord_pts)))
    return InterpolationResult(chain=chain, chord_polyline=Polyline(nodes), d_inf=dinf)
