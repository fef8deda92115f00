"""Ambient geometries: finite metric spaces, embedded metric graphs, normed planes.

All distances are double precision with a global absolute tolerance of 1e-9.
Disconnection is encoded by the ``math.inf`` sentinel, never by a large finite
number: an infinite quasiconvexity constant is a meaningful outcome (the
boundary map stops being an isomorphism there).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

TOL = 1e-9
INF = math.inf


class GeometryError(ValueError):
    """Raised when a space violates its construction invariants."""


# ---------------------------------------------------------------------------
# normed planes


@dataclass(frozen=True)
class NormedPlane:
    """The plane R^2 with an l1, l2, linf or weighted-max norm.

    ``weights`` is only consulted for the ``wmax`` tag, where
    ``norm(v) = max(w0*|v0|, w1*|v1|)``.
    """

    tag: str = "l2"
    weights: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.tag not in ("l1", "l2", "linf", "wmax"):
            raise GeometryError(f"unknown norm tag {self.tag!r}")
        if self.tag == "wmax" and min(self.weights) <= 0:
            raise GeometryError("wmax weights must be positive")

    def norm(self, v) -> float:
        x, y = float(v[0]), float(v[1])
        if self.tag == "l2":
            return math.hypot(x, y)
        if self.tag == "l1":
            return abs(x) + abs(y)
        if self.tag == "linf":
            return max(abs(x), abs(y))
        return max(self.weights[0] * abs(x), self.weights[1] * abs(y))

    def norm_arr(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized norm of an (n, 2) array."""
        pts = np.asarray(pts, dtype=float)
        if self.tag == "l2":
            return np.hypot(pts[..., 0], pts[..., 1])
        if self.tag == "l1":
            return np.abs(pts[..., 0]) + np.abs(pts[..., 1])
        if self.tag == "linf":
            return np.maximum(np.abs(pts[..., 0]), np.abs(pts[..., 1]))
        return np.maximum(self.weights[0] * np.abs(pts[..., 0]),
                          self.weights[1] * np.abs(pts[..., 1]))

    def dist(self, p, q) -> float:
        return self.norm((q[0] - p[0], q[1] - p[1]))

    def dual_norm(self, v) -> float:
        """Norm of a covector, i.e. Lipschitz constant of x -> v . x."""
        x, y = abs(float(v[0])), abs(float(v[1]))
        if self.tag == "l2":
            return math.hypot(x, y)
        if self.tag == "l1":
            return max(x, y)
        if self.tag == "linf":
            return x + y
        return x / self.weights[0] + y / self.weights[1]

    def norm_grad(self, pts: np.ndarray) -> np.ndarray:
        """A.e. gradient of x -> norm(x), vectorized; 0 at the origin."""
        pts = np.asarray(pts, dtype=float)
        g = np.zeros_like(pts)
        if self.tag == "l2":
            n = np.hypot(pts[..., 0], pts[..., 1])
            nz = n > 0
            g[nz] = pts[nz] / n[nz, None]
            return g
        if self.tag == "l1":
            return np.sign(pts)
        ax, ay = np.abs(pts[..., 0]), np.abs(pts[..., 1])
        if self.tag == "linf":
            w0 = w1 = 1.0
        else:
            w0, w1 = self.weights
        xmax = w0 * ax >= w1 * ay
        g[xmax, 0] = w0 * np.sign(pts[xmax, 0])
        g[~xmax, 1] = w1 * np.sign(pts[~xmax, 1])
        return g

    def op_norm(self, a: np.ndarray) -> float:
        """Operator norm of a 2x2 matrix acting on this normed plane."""
        a = np.asarray(a, dtype=float)
        if self.tag == "l2":
            return float(np.linalg.norm(a, 2))
        if self.tag == "l1":
            return float(np.max(np.abs(a).sum(axis=0)))
        if self.tag == "linf":
            return float(np.max(np.abs(a).sum(axis=1)))
        # wmax: exhaust the extreme points of the unit ball (a rectangle)
        cx, cy = 1.0 / self.weights[0], 1.0 / self.weights[1]
        corners = np.array([[cx, cy], [cx, -cy], [-cx, cy], [-cx, -cy]])
        return float(max(self.norm(a @ v) for v in corners))


def d_alpha(p, q, alpha: float) -> float:
    """Rickman rug distance max(|dx|^alpha, |dy|)."""
    return max(abs(q[0] - p[0]) ** alpha, abs(q[1] - p[1]))


# ---------------------------------------------------------------------------
# finite metric spaces


class FiniteMetricSpace:
    """A finite point set with an explicit distance matrix."""

    def __init__(self, points, dist, validate: bool = True):
        self.points = list(points)
        self.dist = np.asarray(dist, dtype=float)
        if validate:
            self._validate()

    @property
    def n(self) -> int:
        return len(self.points)

    def d(self, i: int, j: int) -> float:
        return float(self.dist[i, j])

    def _validate(self):
        d = self.dist
        n = self.n
        if d.shape != (n, n):
            raise GeometryError("distance matrix shape mismatch")
        if np.any(np.diag(d) != 0.0):
            raise GeometryError("diagonal must be exactly 0")
        if not np.allclose(d, d.T, atol=TOL, rtol=0):
            raise GeometryError("distance matrix must be symmetric")
        off = d.copy()
        np.fill_diagonal(off, INF)
        if np.min(off) <= 0:
            raise GeometryError("off-diagonal distances must be positive")
        # triangle inequality within TOL: d(i,j) <= min_k d(i,k) + d(k,j)
        via = np.min(d[:, None, :] + d.T[None, :, :], axis=2)
        if np.min(via - d) < -TOL:
            raise GeometryError("triangle inequality violated beyond 1e-9")


# ---------------------------------------------------------------------------
# metric graphs


def _dijkstra(n: int, adj: list[list[tuple[int, float]]], src: int) -> np.ndarray:
    dist = np.full(n, INF)
    dist[src] = 0.0
    done = [False] * n
    heap = [(0.0, src)]
    while heap:
        du, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for v, w in adj[u]:
            nd = du + w
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


class MetricGraph:
    """An embedded (or abstract) graph with edge lengths and an ambient metric.

    ``ambient`` is one of ``"path"`` (ambient distance is the path metric),
    ``"euclidean"`` (vertices must carry plane coordinates), or
    ``("d_alpha", a)`` for the Rickman metric ``max(|dx|^a, |dy|)``.

    The all-pairs path metric is memoized eagerly at construction; instances
    are immutable afterwards and safe for concurrent reads.
    """

    def __init__(self, vertices, edges, ambient="euclidean", validate: bool = True):
        self.vertices = list(vertices)
        self.edges = [(int(u), int(v), float(w)) for u, v, w in edges]
        self.ambient = ambient
        self.coords = None
        if self.vertices and not isinstance(self.vertices[0], str):
            self.coords = np.asarray(self.vertices, dtype=float).reshape(len(self.vertices), 2)
        n = self.n
        for u, v, w in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise GeometryError(f"edge ({u},{v}) out of range")
            if w <= 0:
                raise GeometryError("edge lengths must be positive")
        self.path_dist = self._all_pairs()
        self.ambient_dist = self._ambient_matrix()
        if validate:
            self._validate()

    @property
    def n(self) -> int:
        return len(self.vertices)

    def _adjacency(self) -> list[list[tuple[int, float]]]:
        adj: list[list[tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return adj

    def _all_pairs(self) -> np.ndarray:
        adj = self._adjacency()
        out = np.empty((self.n, self.n))
        for s in range(self.n):
            out[s] = _dijkstra(self.n, adj, s)
        return out

    def _ambient_matrix(self) -> np.ndarray:
        if self.ambient == "path":
            return self.path_dist.copy()
        if self.coords is None:
            raise GeometryError("embedded ambient metric needs vertex coordinates")
        dx = self.coords[:, None, :] - self.coords[None, :, :]
        if self.ambient == "euclidean":
            return np.hypot(dx[..., 0], dx[..., 1])
        if isinstance(self.ambient, tuple) and self.ambient[0] == "d_alpha":
            a = float(self.ambient[1])
            return np.maximum(np.abs(dx[..., 0]) ** a, np.abs(dx[..., 1]))
        raise GeometryError(f"unknown ambient tag {self.ambient!r}")

    def _validate(self):
        for u, v, w in self.edges:
            if w < self.ambient_dist[u, v] - TOL:
                raise GeometryError(
                    f"edge ({u},{v}) shorter than ambient distance: {w} < {self.ambient_dist[u, v]}")
        finite = np.isfinite(self.path_dist)
        if np.any(self.path_dist[finite] < (self.ambient_dist[finite] - TOL)):
            raise GeometryError("path metric below ambient metric beyond 1e-9")

    def d(self, u: int, v: int) -> float:
        return float(self.ambient_dist[u, v])

    def dl(self, u: int, v: int) -> float:
        return float(self.path_dist[u, v])

    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(u, v): k for k, (u, v, _) in enumerate(self.edges)}


def path_metric(g: MetricGraph) -> np.ndarray:
    """All-pairs intrinsic distance matrix; inf marks disconnected pairs."""
    return g.path_dist.copy()


@dataclass(frozen=True)
class QcReport:
    qc_pair: np.ndarray = field(repr=False)
    qc_space: float = 1.0


def qc_constants(g: MetricGraph) -> QcReport:
    """Pairwise and global quasiconvexity constants d_l / d."""
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = g.path_dist / g.ambient_dist
    ratio[np.isinf(g.path_dist)] = INF  # no curve at all: qc(x, y) = inf
    np.fill_diagonal(ratio, 1.0)
    ratio[np.isnan(ratio)] = 1.0
    qc_space = float(np.max(ratio)) if ratio.size else 1.0
    return QcReport(qc_pair=ratio, qc_space=qc_space)
