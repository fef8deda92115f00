"""Acceptance battery: one runner per criterion, shared by the CLI `suite`
subcommand and the pytest acceptance module.

Each criterion is seeded and deterministic; the details dict records the
measured extremes so reports carry evidence, not just verdicts.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .approximation import CurveMeasure, approximate, measure_as_chain
from .currents import (Ball, Box, Chain1, ClosedSet, HalfPlane, Molecule,
                       Polyline, fat_cantor_intervals, restrict, standard_panel)
from .decomposition import EdgeFlow, boundary_marginals, decompose_flow, \
    fragment_representation
from .flatnorm import CubicalComplex, complex_covering, flat_norm, snap
from .homotopy import AffineBicombing, fill_residual, homotopy_fill
from .rickman import rug_grid
from .spaces import MetricGraph, NormedPlane, qc_constants
from .structure import Line, fat_cantor_chain, normalize
from .solvers import FlowNetwork, LinearProgram, min_cost_flow, simplex_lp
from .transport import ae_norm, minimal_filling


@dataclass(frozen=True)
class CriterionResult:
    index: int
    name: str
    passed: bool
    seconds: float
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.index}: {self.name} ({self.seconds:.2f}s)"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=seed))


def _random_connected_graph(rng, max_n: int = 30) -> MetricGraph:
    n = int(rng.integers(5, max_n + 1))
    pts = rng.uniform(0.0, 10.0, size=(n, 2))
    order = rng.permutation(n)
    edges = []
    seen = set()
    for i in range(1, n):
        u, v = int(order[i - 1]), int(order[i])
        seen.add((min(u, v), max(u, v)))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        u, v = map(int, rng.integers(0, n, size=2))
        if u != v:
            seen.add((min(u, v), max(u, v)))
    for u, v in sorted(seen):
        d = float(np.hypot(*(pts[u] - pts[v])))
        if d > 0:
            edges.append((u, v, d))
    return MetricGraph(pts.tolist(), edges, ambient="euclidean")


def _random_molecule(rng, n: int) -> Molecule:
    k = int(rng.integers(2, min(7, n + 1)))
    verts = rng.choice(n, size=k, replace=False)
    weights = rng.normal(size=k)
    weights[-1] -= weights.sum()
    return Molecule([(int(v), float(w)) for v, w in zip(verts, weights)])


# ---------------------------------------------------------------------------


def criterion_1_isomorphism_sandwich(seed: int = 101) -> CriterionResult:
    """qc^-1 ae(d) <= filling <= qc ae(d) and filling = ae(d_l), 50 seeded graphs."""
    t0 = time.time()
    rng = _rng(seed)
    tol = 1e-7
    worst_gap = 0.0
    ok = True
    for _ in range(50):
        g = _random_connected_graph(rng)
        m = _random_molecule(rng, g.n)
        if not m.atoms:
            continue
        aed = ae_norm(m, g.ambient_dist).value
        aedl = ae_norm(m, g.path_dist).value
        filling = minimal_filling(m, g).mass_value
        qc = qc_constants(g).qc_space
        scale = max(1.0, filling)
        ok &= (aed / qc) <= filling + tol * scale
        ok &= filling <= qc * aed + tol * scale
        gap = abs(filling - aedl) / scale
        worst_gap = max(worst_gap, gap)
        ok &= gap <= tol
    secs = time.time() - t0
    ok &= secs < 10.0
    return CriterionResult(1, "isomorphism sandwich on 50 random graphs", bool(ok),
                           secs, {"worst_identity_gap": worst_gap, "runtime_s": secs})


def criterion_2_optimal_constant_witness() -> CriterionResult:
    """V-detour family: filling / ae ratio equals the detour factor exactly."""
    t0 = time.time()
    ok = True
    ratios = {}
    for factor in (1.5, 2.0, 4.0):
        half = factor / 2.0
        h = math.sqrt(half * half - 0.25)
        g = MetricGraph([[0.0, 0.0], [1.0, 0.0], [0.5, h]],
                        [(0, 2, half), (2, 1, half)], ambient="euclidean")
        m = Molecule([(1, 1.0), (0, -1.0)])
        aed = ae_norm(m, g.ambient_dist).value
        filling = minimal_filling(m, g).mass_value
        ratio = filling / aed
        ratios[str(factor)] = ratio
        ok &= abs(ratio - factor) <= 1e-9
        ok &= abs(qc_constants(g).qc_space - factor) <= 1e-9
    return CriterionResult(2, "optimal-constant witness (V-detour family)", bool(ok),
                           time.time() - t0, {"ratios": ratios})


def criterion_3_rickman(s_count: int = 32) -> CriterionResult:
    """Rug regression: intrinsic AE bound = 2 at every s while mass = 2."""
    t0 = time.time()
    rows = rug_grid(s_count=s_count, n=32, alpha=0.5)
    worst = max(abs(r.ae_intrinsic - 2.0) for r in rows)
    mass_ok = all(abs(r.mass - 2.0) <= 1e-12 for r in rows)
    secs = time.time() - t0
    ok = worst <= 1e-6 and mass_ok and secs < 5.0
    return CriterionResult(3, f"Rickman rug lower bound 2.0 at {s_count} offsets",
                           bool(ok), secs,
                           {"worst_deviation": worst, "runtime_s": secs})


def _random_polyline(rng, scale: float = 2.0) -> Polyline:
    n = int(rng.integers(2, 6))
    return Polyline(rng.uniform(-scale, scale, size=(n, 2)))


def _staircase(rng, steps: int = 4) -> Polyline:
    pts = [np.zeros(2)]
    for k in range(steps):
        step = np.array([1.0, 0.0]) if k % 2 == 0 else np.array([0.0, 1.0])
        if rng.integers(0, 2) == 1 and k > 0:
            step = step[::-1].copy()
        pts.append(pts[-1] + step)
    return Polyline(np.array(pts))


def criterion_4_homotopy_lemma(seed: int = 404, n_pairs: int = 100,
                               n_grid_pairs: int = 10) -> CriterionResult:
    """Fuzzed homotopy fills: residuals, certificate soundness, LP cross-check."""
    t0 = time.time()
    rng = _rng(seed)
    plane = NormedPlane("l2")
    bic = AffineBicombing(plane)
    panel = standard_panel(seed, count=20, scale=2.0)
    ok = True
    worst_resid = 0.0
    for _ in range(n_pairs):
        g0 = _random_polyline(rng)
        g1 = _random_polyline(rng)
        fill = homotopy_fill(g0, g1, bic)
        ok &= fill.measured_s <= (g0.length + g1.length) * fill.d_inf + 1e-6
        ok &= fill.r_chain.mass() <= fill.cert_r + 1e-9
        for form in panel:
            allowed = 1e-6 * (1.0 + form.lip_pi * form.sup_f)
            resid = fill_residual(g0, g1, fill, form, plane)
            worst_resid = max(worst_resid, resid / allowed)
            ok &= resid <= allowed
    # grid-snapped pairs: LP flat norm of the difference <= certS + certR
    worst_lp_margin = -math.inf
    for _ in range(n_grid_pairs):
        g0 = _staircase(rng)
        g1 = _staircase(rng).translate((0.0, float(rng.integers(0, 3))))
        fill = homotopy_fill(g0, g1, bic)
        cx = complex_covering([g0, g1], h=1.0, margin=1)
        diff = snap(g0.as_chain(plane), cx) - snap(g1.as_chain(plane), cx)
        lp = flat_norm(diff, cx)
        margin = lp.value - (fill.cert_s + fill.cert_r)
        worst_lp_margin = max(worst_lp_margin, margin)
        ok &= margin <= 1e-6
    secs = time.time() - t0
    ok &= secs < 30.0
    return CriterionResult(4, f"homotopy lemma on {n_pairs} fuzzed pairs", bool(ok),
                           secs, {"worst_residual_ratio": worst_resid,
                                  "worst_lp_margin": worst_lp_margin,
                                  "runtime_s": secs})


def _translate_family(rng, base: Polyline, count: int, span: float,
                      weights_one: bool = False, integer_offsets: bool = False):
    """Vertical translates with evenly spread offsets (sorted input order)."""
    if integer_offsets:
        offsets = np.arange(count, dtype=float)
    else:
        step = span / count
        offsets = np.sort(step * np.arange(count)
                          + rng.uniform(-0.1 * step, 0.1 * step, size=count))
        offsets -= offsets.min()
    entries = []
    for off in offsets:
        w = 1.0 if weights_one else float(rng.uniform(0.5, 1.5))
        entries.append((w, base.translate((0.0, float(off)))))
    return CurveMeasure.of(entries)


def criterion_5_geodesic_approximation(seed: int = 505) -> CriterionResult:
    """Mass non-increase, LP-checked certificates, and eps-halving behavior."""
    t0 = time.time()
    rng = _rng(seed)
    plane = NormedPlane("l2")
    ok = True
    details: dict = {"halving_ratios": [], "lp_margins": []}
    for case in range(20):
        grid_case = case >= 15
        if grid_case:
            base = Polyline([[0, 0], [1, 0], [1, 1], [2, 1], [2, 2]])  # unit steps
            cm = _translate_family(rng, base, count=25, span=24.0,
                                   weights_one=True, integer_offsets=True)
            eps, mesh = 8.0, 0.25  # chord nodes hit the staircase corners
        else:
            base = _random_polyline(rng, scale=1.0)
            if base.length > 3.5 or base.length < 0.5:
                base = Polyline([[0, 0], [1.5, 0.7], [2.5, 0.2]])
            eps = 0.4
            mesh = 0.25
            cm = _translate_family(rng, base, count=80, span=5.0 * eps)
        assert cm.length_bound <= 4.0 + 1e-12
        p, cert = approximate(cm, eps=eps, mesh=mesh, plane=plane)
        ok &= p.mass() <= cm.induced_mass + 1e-9
        _, cert_half = approximate(cm, eps=eps / 2.0, mesh=mesh, plane=plane)
        if cert.clustering_term > 0:
            ratio = cert_half.clustering_term / cert.clustering_term
            details["halving_ratios"].append(ratio)
            ok &= 0.4 <= ratio <= 0.6
        if grid_case:
            n_chain = measure_as_chain(cm, plane)
            cx = complex_covering([poly for _, poly in cm.entries] + [base], h=1.0)
            diff = snap(n_chain, cx) - snap(p, cx)
            lp = flat_norm(diff, cx)
            margin = lp.value - cert.flat_bound
            details["lp_margins"].append(margin)
            ok &= margin <= 1e-6
    secs = time.time() - t0
    details["runtime_s"] = secs
    return CriterionResult(5, "geodesic approximation of 20 curve measures",
                           bool(ok), secs, details)


def criterion_6_hyperplane_normalization() -> CriterionResult:
    """Fat-Cantor chains: exact boundary kill, mass ratio, restriction identity."""
    t0 = time.time()
    plane = NormedPlane("l2")
    line = Line(0.0, 1.0, 0.0)
    ok = True
    masses = []
    for k in range(0, 7):
        t = fat_cantor_chain(k, plane)
        expected = 0.5 + 2.0 ** (-(k + 1))
        masses.append(t.mass())
        ok &= t.mass() == expected
        res = normalize(t, line, eps=0.1)
        ok &= res.boundary_residual <= 1e-9
        ok &= res.n_chain.mass() <= 2.1 * t.mass() + 1e-9
        frag = restrict(res.n_chain, res.b_set)
        ok &= abs(frag.mass() - t.mass()) <= 1e-9
    secs = time.time() - t0
    ok &= secs < 5.0
    return CriterionResult(6, "hyperplane normalization of fat-Cantor chains",
                           bool(ok), secs, {"masses": masses, "runtime_s": secs})


def criterion_7_decomposition(seed: int = 707) -> CriterionResult:
    """Reassembly, mass additivity, marginals on 50 flows; fragment identity on 20 sets."""
    t0 = time.time()
    rng = _rng(seed)
    ok = True
    worst = 0.0
    flows = []
    for _ in range(50):
        g = _random_connected_graph(rng, max_n=15)
        m = _random_molecule(rng, g.n)
        fill = minimal_filling(m, g)
        weights = np.zeros(len(g.edges))
        index = g.edge_index()
        for piece in fill.chain.pieces:
            if (piece.start, piece.end) in index:
                weights[index[(piece.start, piece.end)]] += piece.weight
            else:
                weights[index[(piece.end, piece.start)]] -= piece.weight
        ef = EdgeFlow(g, tuple(weights))
        d = decompose_flow(ef)
        err = float(np.max(np.abs(d.reassembled() - np.array(ef.weights)))) \
            if len(g.edges) else 0.0
        worst = max(worst, err)
        ok &= err <= 1e-9
        ok &= abs(d.mass_defect) <= 1e-9
        starts, ends = boundary_marginals(d)
        neg = {p: w for p, w in m.atoms if w < 0}
        pos = {p: w for p, w in m.atoms if w > 0}
        for p, w in starts.atoms:
            ok &= abs(w - (-neg.get(p, 0.0))) <= 1e-9
        for p, w in ends.atoms:
            ok &= abs(w - pos.get(p, 0.0)) <= 1e-9
        flows.append((ef, d))
    # fragment identity on 20 closed sets (incl. fat-Cantor boxes)
    worst_frag = 0.0
    for i in range(20):
        ef, d = flows[i % len(flows)]
        if i % 4 == 0:
            ivs = fat_cantor_intervals(2 + (i // 4) % 3)
            prims = tuple(Box((a * 10.0, -10.0), (b * 10.0, 10.0)) for a, b in ivs)
            e = ClosedSet(prims)
        elif i % 4 == 1:
            cx, cy = rng.uniform(0, 10, size=2)
            e = ClosedSet.of(Ball((float(cx), float(cy)), float(rng.uniform(2, 6))))
        elif i % 4 == 2:
            e = ClosedSet.of(HalfPlane(1.0, float(rng.uniform(-1, 1)),
                                       float(rng.uniform(2, 8))))
        else:
            e = ClosedSet.of(Box((0.0, 0.0), (float(rng.uniform(3, 9)),) * 2),
                             Ball((8.0, 8.0), 2.0))
        rep = fragment_representation(d, e)
        worst_frag = max(worst_frag, rep.mass_identity_residual)
        ok &= rep.mass_identity_residual <= 1e-9
    secs = time.time() - t0
    return CriterionResult(7, "decomposition and fragment identities", bool(ok),
                           secs, {"worst_reassembly": worst,
                                  "worst_fragment_residual": worst_frag})


def criterion_8_solver_cross_validation(seed: int = 808) -> CriterionResult:
    """Flow vs simplex on 100 transportation instances; dual feasibility."""
    t0 = time.time()
    rng = _rng(seed)
    ok = True
    worst = 0.0
    for _ in range(100):
        ns = int(rng.integers(2, 11))
        nd = int(rng.integers(2, 11))
        cost = rng.uniform(0.1, 5.0, size=(ns, nd))
        sup = rng.uniform(0.1, 2.0, size=ns)
        dem = rng.uniform(0.1, 2.0, size=nd)
        dem *= sup.sum() / dem.sum()
        arcs = tuple((i, ns + j, float(cost[i, j]), math.inf)
                     for i in range(ns) for j in range(nd))
        net = FlowNetwork(ns + nd, arcs, tuple(np.concatenate([sup, -dem])))
        fres = min_cost_flow(net)
        a = np.zeros((ns + nd, ns * nd))
        for i in range(ns):
            for j in range(nd):
                a[i, i * nd + j] = 1.0
                a[ns + j, i * nd + j] = 1.0
        lres = simplex_lp(LinearProgram(c=cost.flatten(), a=a,
                                        b=np.concatenate([sup, dem])))
        scale = max(1.0, abs(lres.optimum))
        gap = abs(fres.total_cost - lres.optimum) / scale
        dual_gap = abs(lres.optimum
                       - float(np.concatenate([sup, dem]) @ lres.y)) / scale
        worst = max(worst, gap, dual_gap)
        ok &= gap <= 1e-7 and dual_gap <= 1e-7
        for (u, v, cst, _) in net.arcs:
            ok &= cst + fres.potentials[u] - fres.potentials[v] >= -1e-9
        red = cost.flatten() - a.T @ lres.y
        ok &= float(red.min()) >= -1e-7
    secs = time.time() - t0
    return CriterionResult(8, "solver cross-validation on 100 instances", bool(ok),
                           secs, {"worst_gap": worst})


def criterion_9_flatnorm_closed_forms() -> CriterionResult:
    """Unit square -> 1; 1 x k rectangles -> min(2 + 2k, k)."""
    t0 = time.time()
    plane = NormedPlane("l2")
    ok = True
    values = {}
    cx = CubicalComplex(origin=(0.0, 0.0), h=1.0, nx=3, ny=3)
    sq = Chain1.from_segments(plane, [((1, 1), (2, 1), 1.0), ((2, 1), (2, 2), 1.0),
                                      ((2, 2), (1, 2), 1.0), ((1, 2), (1, 1), 1.0)])
    v = flat_norm(snap(sq, cx), cx).value
    values["square"] = v
    ok &= abs(v - 1.0) <= 1e-8
    for k in range(1, 9):
        cxk = CubicalComplex(origin=(0.0, 0.0), h=1.0, nx=k + 2, ny=3)
        rect = Chain1.from_segments(plane, [
            ((1, 1), (1 + k, 1), 1.0), ((1 + k, 1), (1 + k, 2), 1.0),
            ((1 + k, 2), (1, 2), 1.0), ((1, 2), (1, 1), 1.0)])
        v = flat_norm(snap(rect, cxk), cxk).value
        values[f"rect_1x{k}"] = v
        ok &= abs(v - min(2 + 2 * k, k)) <= 1e-8
    return CriterionResult(9, "flat-norm LP closed forms", bool(ok),
                           time.time() - t0, {"values": values})


ALL_CRITERIA = [
    criterion_1_isomorphism_sandwich,
    criterion_2_optimal_constant_witness,
    criterion_3_rickman,
    criterion_4_homotopy_lemma,
    criterion_5_geodesic_approximation,
    criterion_6_hyperplane_normalization,
    criterion_7_decomposition,
    criterion_8_solver_cross_validation,
    criterion_9_flatnorm_closed_forms,
]


def run_all(verbose: bool = True) -> list[CriterionResult]:
    results = []
    for fn in ALL_CRITERIA:
        res = fn()
        results.append(res)
        if verbose:
            print(res.line(), flush=True)
    return results
