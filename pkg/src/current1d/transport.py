"""Arens-Eells norms, minimal-mass fillings, and the isomorphism-theorem verifier.

The AE norm of a molecule equals the Wasserstein-1 cost between its positive
and negative parts (the molecule-representation infimum collapses to W1 over
a metric: any representation induces a feasible coupling and conversely), so
it is computed by min-cost flow on the complete bipartite network over the
molecule's own atoms; relay routing through other space points cannot improve
by the triangle inequality.

The dual potential is recovered from the flow's node potentials on the
negative atoms and extended with the McShane formula
``u(x) = min_y (u(y) + d(x, y))``, which is 1-Lipschitz by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .currents import Chain1, Molecule
from .spaces import MetricGraph, NormedPlane, qc_constants
from .solvers import FlowNetwork, Infeasible, min_cost_flow

TOL = 1e-9
IDENT_TOL = 1e-7


class TransportError(ValueError):
    pass


def _metric_fn(metric):
    """Accept a distance matrix, a NormedPlane, or a callable d(p, q)."""
    if isinstance(metric, np.ndarray):
        return lambda p, q: float(metric[p, q])
    if isinstance(metric, NormedPlane):
        return metric.dist
    if callable(metric):
        return metric
    raise TransportError(f"unsupported metric object {type(metric)}")


@dataclass(frozen=True)
class AeResult:
    value: float
    coupling: tuple[tuple[object, object, float], ...] = ()
    potential: dict = field(default_factory=dict, repr=False)


def ae_norm(m: Molecule, metric, extra_points=()) -> AeResult:
    """Arens-Eells norm of a molecule with an optimal coupling and a dual certificate.

    ``metric`` is a dense matrix (integer atom keys), a NormedPlane (tuple
    keys), or a callable. The returned potential is 1-Lipschitz and pairs with
    the molecule to the value (Kantorovich duality); it is defined on the atom
    keys plus any ``extra_points``.
    """
    d = _metric_fn(metric)
    pos = m.positive_part()
    neg = m.negative_part()
    if not pos and not neg:
        pot = {p: 0.0 for p in extra_points}
        return AeResult(0.0, (), pot)

    points = [p for p, _ in pos] + [q for q, _ in neg]
    np_, nn = len(pos), len(neg)
    arcs = []
    for i, (p, _) in enumerate(pos):
        for j, (q, _) in enumerate(neg):
            c = d(p, q)
            if math.isfinite(c):
                arcs.append((i, np_ + j, c, math.inf))
    divergence = [w for _, w in pos] + [-w for _, w in neg]
    net = FlowNetwork(np_ + nn, tuple(arcs), tuple(divergence))
    res = min_cost_flow(net)

    coupling = []
    for k, (i, j, c, _) in enumerate(net.arcs):
        if res.flows[k] > TOL:
            coupling.append((points[i], points[j], float(res.flows[k])))

    # dual potential anchored at the negative atoms: u(x) = min_q d(x, q) - pi(q)
    anchors = [(points[np_ + j], -res.potentials[np_ + j]) for j in range(nn)]

    def u(x):
        return min(d(x, q) + val for q, val in anchors)

    support = [p for p, _ in m.atoms]
    pot = {}
    base = None
    for x in list(support) + list(extra_points):
        if x in pot:
            continue
        val = u(x)
        if base is None:
            base = val
        pot[x] = float(val - base)
    return AeResult(float(res.total_cost), tuple(coupling), pot)


@dataclass(frozen=True)
class FillingResult:
    chain: Chain1
    mass_value: float


def minimal_filling(m: Molecule, g: MetricGraph) -> FillingResult:
    """Least-mass chain on graph edges with the prescribed boundary.

    This is the Beckmann problem: min-cost flow with both orientations of each
    edge at cost = length and divergence = the molecule. Equals the AE norm of
    the molecule under the path metric (checked independently by the caller).
    """
    for p, _ in m.atoms:
        if not isinstance(p, (int, np.integer)) or not (0 <= p < g.n):
            raise TransportError(f"molecule atom {p!r} is not a vertex of the graph")
    # flow sources sit at the negative part so that boundary(chain) = m
    # (a piece u -> v contributes weight at v and -weight at u)
    divergence = np.zeros(g.n)
    for p, w in m.atoms:
        divergence[p] -= w
    arcs = []
    for u, v, w in g.edges:
        arcs.append((u, v, w, math.inf))
        arcs.append((v, u, w, math.inf))
    net = FlowNetwork(g.n, tuple(arcs), tuple(divergence))
    try:
        res = min_cost_flow(net)
    except Infeasible as exc:
        raise Infeasible(f"molecule not balanceable within components: {exc}") from exc
    flows = []
    for k, (u, v, w) in enumerate(g.edges):
        netw = float(res.flows[2 * k] - res.flows[2 * k + 1])
        if abs(netw) > 1e-12:
            flows.append((u, v, netw))
    chain = Chain1.from_graph_edges(g, flows)
    return FillingResult(chain=chain, mass_value=chain.mass())


@dataclass(frozen=True)
class IsoReport:
    ae_ambient: float
    ae_intrinsic: float
    filling_mass: float
    qc: float
    ratio: float
    lower_ok: bool
    upper_ok: bool
    ae_lower_ok: bool
    identity_ok: bool

    def all_ok(self) -> bool:
        return self.lower_ok and self.upper_ok and self.ae_lower_ok and self.identity_ok


def isomorphism_check(t: Chain1, g: MetricGraph, tol: float = IDENT_TOL) -> IsoReport:
    """Verify the quasiconvexity sandwich for the boundary of a chain.

    Checks qc^-1 * ae(d) <= filling <= qc * ae(d), the solver identity
    filling = ae(d_l), and the unconditional lower bound ae(d) <= filling
    (the boundary operator has norm one).
    """
    if np.any(np.isinf(g.path_dist)):
        raise TransportError("isomorphism check needs a connected graph")
    m = t.boundary()
    ae_amb = ae_norm(m, g.ambient_dist).value
    ae_intr = ae_norm(m, g.path_dist).value
    filling = minimal_filling(m, g).mass_value
    qc = qc_constants(g).qc_space
    scale = max(1.0, filling, ae_amb)
    lower_ok = (ae_amb / qc) <= filling + tol * scale
    upper_ok = filling <= qc * ae_amb + tol * scale
    ae_lower_ok = ae_amb <= filling + tol * scale
    identity_ok = abs(filling - ae_intr) <= tol * scale
    ratio = filling / ae_amb if ae_amb > 0 else (1.0 if filling == 0 else math.inf)
    return IsoReport(ae_ambient=ae_amb, ae_intrinsic=ae_intr, filling_mass=filling,
                     qc=qc, ratio=ratio, lower_ok=lower_ok, upper_ok=upper_ok,
                     ae_lower_ok=ae_lower_ok, identity_ok=identity_ok)
