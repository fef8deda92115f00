"""In-house optimization engines: min-cost flow and a dense revised simplex.

Both are deterministic: the flow solver orders arcs by input index and breaks
shortest-path ties by lowest node index; the simplex uses Bland's rule, which
also precludes cycling. Desk-scale instances only (a few thousand variables).
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9
log = logging.getLogger("current1d.solvers")


class SolverError(RuntimeError):
    pass


class Infeasible(SolverError):
    pass


class Unbounded(SolverError):
    pass


class IterationLimit(SolverError):
    pass


# ---------------------------------------------------------------------------
# min-cost flow: successive shortest augmenting paths with Johnson potentials


@dataclass(frozen=True)
class FlowNetwork:
    """Directed arcs (u, v, cost >= 0, capacity in (0, inf]) with node divergences.

    divergence[v] > 0 is supply leaving v, < 0 is demand arriving at v;
    divergences must sum to zero.
    """

    n: int
    arcs: tuple[tuple[int, int, float, float], ...]
    divergence: tuple[float, ...]

    def __post_init__(self):
        if len(self.divergence) != self.n:
            raise SolverError("divergence length mismatch")
        tot = sum(self.divergence)
        scale = max(1.0, sum(abs(d) for d in self.divergence))
        if abs(tot) > TOL * scale:
            raise SolverError(f"divergences sum to {tot}, not 0")
        for u, v, c, cap in self.arcs:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise SolverError("arc endpoint out of range")
            if c < 0 or cap <= 0:
                raise SolverError("need cost >= 0 and capacity > 0")


@dataclass(frozen=True)
class FlowResult:
    flows: np.ndarray = field(repr=False)
    total_cost: float = 0.0
    potentials: np.ndarray = field(default=None, repr=False)


def min_cost_flow(net: FlowNetwork) -> FlowResult:
    """Route all supply to demand at minimum cost.

    Returns per-arc flows, the optimal cost, and node potentials pi that are
    feasible duals: cost(u,v) + pi(u) - pi(v) >= 0 on every arc with residual
    capacity (every arc, in the uncapacitated networks built by this package).
    Complementary slackness holds on flow-carrying arcs.
    """
    n, arcs = net.n, net.arcs
    m = len(arcs)
    head = np.array([v for _, v, _, _ in arcs], dtype=int) if m else np.zeros(0, dtype=int)
    tail = np.array([u for u, _, _, _ in arcs], dtype=int) if m else np.zeros(0, dtype=int)
    cost = np.array([c for _, _, c, _ in arcs], dtype=float)
    cap = np.array([ca for _, _, _, ca in arcs], dtype=float)
    flow = np.zeros(m)
    # residual arc id: 2k forward (tail->head, cap-flow, +cost),
    #                  2k+1 reverse (head->tail, flow, -cost)
    adj: list[list[int]] = [[] for _ in range(n)]
    for k in range(m):
        adj[tail[k]].append(2 * k)
        adj[head[k]].append(2 * k + 1)

    excess = np.array(net.divergence, dtype=float)
    total_supply = float(np.sum(excess[excess > 0]))
    eps = TOL * max(1.0, total_supply)

    # one Bellman-Ford pass for initial potentials (zeros when costs >= 0)
    pi = np.zeros(n)
    for _ in range(n - 1):
        changed = False
        for k in range(m):
            if pi[tail[k]] + cost[k] < pi[head[k]] - 1e-15:
                pi[head[k]] = pi[tail[k]] + cost[k]
                changed = True
        if not changed:
            break

    def res_cap(a: int) -> float:
        k, rev = divmod(a, 2)
        return flow[k] if rev else cap[k] - flow[k]

    while True:
        sources = [v for v in range(n) if excess[v] > eps]
        if not sources:
            if np.any(excess < -eps) and m == 0:
                raise Infeasible("demand with no arcs")
            break
        dist = np.full(n, math.inf)
        pred = [-1] * n
        settled = [False] * n
        heap: list[tuple[float, int]] = []
        for s in sorted(sources):
            dist[s] = 0.0
            heapq.heappush(heap, (0.0, s))
        target = -1
        while heap:
            du, u = heapq.heappop(heap)
            if settled[u] or du > dist[u]:
                continue
            settled[u] = True
            if excess[u] < -eps:
                target = u
                break
            for a in adj[u]:
                if res_cap(a) <= eps * 1e-3:
                    continue
                k, rev = divmod(a, 2)
                v = tail[k] if rev else head[k]
                if settled[v]:
                    continue
                rc = (-cost[k] if rev else cost[k]) + pi[u] - pi[v]
                nd = du + rc
                if nd < dist[v] - 1e-15:
                    dist[v] = nd
                    pred[v] = a
                    heapq.heappush(heap, (nd, v))
        if target < 0:
            raise Infeasible("supply cannot reach demand under the given arcs")
        dt = dist[target]
        for v in range(n):
            pi[v] += min(dist[v], dt) if math.isfinite(dist[v]) else dt
        # trace the augmenting path back to its source
        path = []
        v = target
        while pred[v] >= 0:
            a = pred[v]
            path.append(a)
            k, rev = divmod(a, 2)
            v = head[k] if rev else tail[k]
        source = v
        bottleneck = min(excess[source], -excess[target])
        for a in path:
            bottleneck = min(bottleneck, res_cap(a))
        for a in path:
            k, rev = divmod(a, 2)
            flow[k] += -bottleneck if rev else bottleneck
        excess[source] -= bottleneck
        excess[target] += bottleneck
        log.debug("augment %s -> %s: %.17g units over %d arcs",
                  source, target, bottleneck, len(path))

    total = float(np.dot(flow, cost)) if m else 0.0
    return FlowResult(flows=flow, total_cost=total, potentials=pi.copy())


# ---------------------------------------------------------------------------
# revised simplex with Bland's rule


@dataclass(frozen=True)
class LinearProgram:
    """min c.x  s.t.  A x = b, x >= 0 (free variables must be pre-split)."""

    c: np.ndarray
    a: np.ndarray
    b: np.ndarray


@dataclass(frozen=True)
class LpResult:
    optimum: float
    x: np.ndarray = field(repr=False)
    y: np.ndarray = field(repr=False)
    iterations: int = 0


_MAX_PIVOTS = 10 ** 5
_REFRESH = 50


class _Basis:
    """Dense basis inverse with product-form updates, refactorized every _REFRESH pivots."""

    def __init__(self, a: np.ndarray, cols: list[int]):
        self.a = a
        self.cols = list(cols)
        self.colset = set(self.cols)
        self.refresh()

    def refresh(self):
        self.binv = np.linalg.inv(self.a[:, self.cols])
        self.age = 0

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self.binv @ rhs

    def solve_t(self, lhs: np.ndarray) -> np.ndarray:
        return lhs @ self.binv

    def pivot(self, row: int, col: int):
        self.colset.discard(self.cols[row])
        self.colset.add(col)
        self.cols[row] = col
        self.age += 1
        if self.age >= _REFRESH:
            self.refresh()
            return
        d = self.binv @ self.a[:, col]
        piv = d[row]
        if abs(piv) < 1e-12:
            self.refresh()
            return
        self.binv[row] /= piv
        others = np.arange(len(d)) != row
        self.binv[others] -= np.outer(d[others], self.binv[row])


def _run_phase(a: np.ndarray, b: np.ndarray, c: np.ndarray, basis: _Basis,
               allow: np.ndarray, max_iters: int) -> tuple[np.ndarray, int]:
    """Run simplex pivots under Bland's rule until optimal; returns (x_B, iterations)."""
    m = a.shape[0]
    it = 0
    while True:
        if it >= max_iters:
            raise IterationLimit("simplex exceeded the pivot budget")
        xb = basis.solve(b)
        y = basis.solve_t(c[basis.cols])
        red = c - y @ a
        enter = -1
        eligible = np.where(allow & (red < -1e-9))[0]
        for j in eligible:
            if j not in basis.colset:
                enter = int(j)
                break
        if enter < 0:
            return xb, it
        d = basis.solve(a[:, enter])
        best = math.inf
        leave = -1
        for i in range(m):
            if d[i] > 1e-11:
                r = max(xb[i], 0.0) / d[i]
                if r < best - 1e-15 or (r <= best + 1e-15 and leave >= 0
                                        and basis.cols[i] < basis.cols[leave]):
                    best = r
                    leave = i
        if leave < 0:
            raise Unbounded("unbounded direction in simplex")
        log.debug("pivot %d: col %d enters, row %d (col %d) leaves, ratio %.17g",
                  it, enter, leave, basis.cols[leave], best)
        basis.pivot(leave, enter)
        it += 1


def simplex_lp(lp: LinearProgram) -> LpResult:
    """Two-phase revised simplex with Bland's rule.

    Returns the optimum, primal solution, and dual vector y = c_B B^-1 (sign
    adjusted for rows flipped to nonnegative rhs), so strong duality
    |c.x - b.y| <= 1e-7 (1 + |optimum|) holds at the reported solution.
    Redundant equality rows leave an artificial pinned at zero in the basis;
    the optimum matches the program with the row removed.
    """
    a = np.asarray(lp.a, dtype=float).copy()
    b = np.asarray(lp.b, dtype=float).copy()
    c = np.asarray(lp.c, dtype=float)
    m, n = a.shape
    neg = b < 0
    a[neg] *= -1.0
    b[neg] *= -1.0

    a1 = np.hstack([a, np.eye(m)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    allow1 = np.ones(n + m, dtype=bool)
    basis = _Basis(a1, list(range(n, n + m)))
    xb, it1 = _run_phase(a1, b, c1, basis, allow1, _MAX_PIVOTS)
    art = [i for i, col in enumerate(basis.cols) if col >= n]
    art_val = float(np.sum(np.abs(xb[art]))) if art else 0.0
    if art_val > 1e-8 * max(1.0, float(np.abs(b).sum())):
        raise Infeasible(f"phase-1 optimum {art_val} > 0")

    # drive artificials out of the basis where a pivot exists
    for i in list(art):
        if basis.cols[i] >= n:
            row = basis.binv[i] @ a
            for j in range(n):
                if j not in basis.colset and abs(row[j]) > 1e-9:
                    basis.pivot(i, j)
                    break
            # otherwise the row is redundant; the artificial stays at level 0

    c2 = np.concatenate([c, np.zeros(m)])
    allow2 = np.concatenate([np.ones(n, dtype=bool), np.zeros(m, dtype=bool)])
    xb, it2 = _run_phase(a1, b, c2, basis, allow2, _MAX_PIVOTS - it1)

    x = np.zeros(n)
    for i, col in enumerate(basis.cols):
        if col < n:
            x[col] = max(xb[i], 0.0)
    y = np.asarray(basis.solve_t(c2[basis.cols]))
    y = y * np.where(neg, -1.0, 1.0)
    return LpResult(optimum=float(c @ x), x=x, y=y, iterations=it1 + it2)
