"""Hyperplane normalization pipeline: rescale into the interior, translate off
finitely many atoms, iterate to a rectifiable filling with the same boundary
and (1+eps) mass, and normalize a line-supported chain into a boundaryless one
whose restriction to the line reproduces it.

Mutual singularity is rendered finitely: an atomic measure is singular to a
chain when no atom sits on the relative interior of a piece, and a chain is
singular to the line when no positive-length piece lies inside it (touching
the line at finitely many endpoints carries zero length). Remainders of the
affine-homotopy translation are exact chains: the connector segments at the
boundary atoms, which lets the iteration close the boundary exactly instead
of leaving a flat-norm tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .currents import (AffineMap, Chain1, ClosedSet, Molecule, Piece, Slab,
                       pushforward)
from .spaces import MetricGraph, NormedPlane
from .transport import ae_norm, minimal_filling

TOL = 1e-9
GEOM_EPS = 1e-12


class StructureError(ValueError):
    pass


class NoAdmissibleShift(StructureError):
    pass


# ---------------------------------------------------------------------------
# geometry helpers


@dataclass(frozen=True)
class Line:
    """The line a*x + b*y = c with (a, b) euclidean-normalized."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        n = math.hypot(self.a, self.b)
        if n == 0:
            raise StructureError("degenerate line normal")
        object.__setattr__(self, "a", self.a / n)
        object.__setattr__(self, "b", self.b / n)
        object.__setattr__(self, "c", self.c / n)

    def signed_dist(self, p) -> float:
        return self.a * p[0] + self.b * p[1] - self.c

    def normal(self) -> tuple[float, float]:
        return (self.a, self.b)

    def direction(self) -> tuple[float, float]:
        return (-self.b, self.a)

    def contains(self, p, tol: float = TOL) -> bool:
        return abs(self.signed_dist(p)) <= tol

    def as_closed_set(self, thickness: float = 0.0) -> ClosedSet:
        th = thickness if thickness > 0 else GEOM_EPS * (1.0 + abs(self.c))
        return ClosedSet.of(Slab(self.a, self.b, self.c - th, self.c + th))


@dataclass(frozen=True)
class ConvexBox:
    center: tuple[float, float]
    half_widths: tuple[float, float]

    def __post_init__(self):
        if min(self.half_widths) <= 0:
            raise StructureError("half-widths must be positive")

    def contains(self, p, margin: float = 0.0) -> bool:
        return (abs(p[0] - self.center[0]) <= self.half_widths[0] - margin
                and abs(p[1] - self.center[1]) <= self.half_widths[1] - margin)

    def min_half_width(self) -> float:
        return float(min(self.half_widths))


@dataclass(frozen=True)
class AtomicMeasure:
    atoms: tuple[tuple[tuple[float, float], float], ...]

    @staticmethod
    def of(points: Sequence, weight: float = 1.0) -> "AtomicMeasure":
        return AtomicMeasure(tuple(((float(p[0]), float(p[1])), float(weight))
                                   for p in points))

    @staticmethod
    def empty() -> "AtomicMeasure":
        return AtomicMeasure(())

    def points(self):
        return [p for p, _ in self.atoms]


def _seg_point_dist(p, a, b) -> float:
    ax, ay = b[0] - a[0], b[1] - a[1]
    px, py = p[0] - a[0], p[1] - a[1]
    den = ax * ax + ay * ay
    if den == 0.0:
        return math.hypot(px, py)
    t = max(0.0, min(1.0, (px * ax + py * ay) / den))
    return math.hypot(px - t * ax, py - t * ay)


def _atom_on_interior(p, a, b, tol: float = GEOM_EPS) -> bool:
    """Atom strictly inside segment (a, b): on the segment but at neither endpoint."""
    if _seg_point_dist(p, a, b) > tol:
        return False
    return (math.hypot(p[0] - a[0], p[1] - a[1]) > tol
            and math.hypot(p[0] - b[0], p[1] - b[1]) > tol)


def _piece_coords(chain: Chain1, piece: Piece):
    return chain.coords_of(piece.start), chain.coords_of(piece.end)


def piece_inside_line(a, b, line: Line, tol: float = GEOM_EPS) -> bool:
    """Positive-length segment entirely inside the line."""
    if a == b:
        return False
    return abs(line.signed_dist(a)) <= tol and abs(line.signed_dist(b)) <= tol


def is_admissible(chain: Chain1, mu: AtomicMeasure, line: Optional[Line],
                  tol: float = GEOM_EPS) -> bool:
    """Desk-scale mutual singularity: no mu atom on a piece's relative interior,
    no positive-length piece inside the line."""
    for piece in chain.pieces:
        if piece.weight == 0.0:
            continue
        a, b = _piece_coords(chain, piece)
        if line is not None and piece_inside_line(a, b, line, tol):
            return False
        for p in mu.points():
            if _atom_on_interior(p, a, b, tol):
                return False
    return True


# ---------------------------------------------------------------------------
# rescale into the interior


def rescale_interior(p_chain: Chain1, box: ConvexBox, eps: float) -> tuple[Chain1, float]:
    """Shrink a chain toward the box center so its support is strictly interior.

    Returns (P', flat certificate). The certificate is the affine-homotopy
    bound eta * (2 int |x - c| d|P| + sum |dw_j| |x_j - c|) for the scaling
    h_{1-eta}; eta is chosen to keep the certificate at most eps, capped at
    1/4, floored at 1e-9 to guarantee a strictly positive interior margin.
    """
    if eps <= 0:
        raise StructureError("eps must be positive")
    plane = p_chain.space if isinstance(p_chain.space, NormedPlane) else NormedPlane("l2")
    cx, cy = box.center
    rate = 0.0
    for piece in p_chain.pieces:
        a, b = _piece_coords(p_chain, piece)
        if not box.contains(a) or not box.contains(b):
            raise StructureError("chain support must lie inside the box")
        # |x - c| is convex along the segment, so the trapezoid overestimates
        na = plane.norm((a[0] - cx, a[1] - cy))
        nb = plane.norm((b[0] - cx, b[1] - cy))
        rate += 2.0 * abs(piece.weight) * piece.length * (na + nb) / 2.0
    for p, w in p_chain.boundary().atoms:
        q = p if isinstance(p, tuple) else _pt_of(p_chain, p)
        rate += abs(w) * plane.norm((q[0] - cx, q[1] - cy))
    eta = min(0.25, eps / rate) if rate > 0 else 0.25
    eta = max(eta, 1e-9)
    scaled = pushforward(p_chain, AffineMap.scaling(1.0 - eta, center=box.center))
    return scaled, float(eta * rate)


def _pt_of(chain: Chain1, key):
    return chain.coords_of(key)


# ---------------------------------------------------------------------------
# translate off the singular set


@dataclass(frozen=True)
class TranslateResult:
    chain: Chain1
    t: float
    w: tuple[float, float]
    flat_cert: float
    connectors: Chain1 = field(repr=False, default=None)


def _candidate_direction(p_chain: Chain1, line: Optional[Line], plane: NormedPlane):
    """First unit direction transverse to the line and to every piece direction."""
    dirs = []
    for piece in p_chain.pieces:
        a, b = _piece_coords(p_chain, piece)
        dx, dy = b[0] - a[0], b[1] - a[1]
        n = math.hypot(dx, dy)
        if n > 0:
            dirs.append((dx / n, dy / n))
    ncand = 64 + 8 * len(dirs)
    for k in range(ncand):
        th = math.pi * (2 * k + 1) / (2 * ncand)
        w = (math.cos(th), math.sin(th))
        if line is not None and abs(w[0] * line.a + w[1] * line.b) < 1e-6:
            continue
        if any(abs(w[0] * dy - w[1] * dx) < 1e-9 for dx, dy in dirs):
            continue
        return w
    raise NoAdmissibleShift("no direction clears the line and all piece directions")


def translate_singular(p_chain: Chain1, mu: AtomicMeasure, line: Optional[Line],
                       t1: float) -> TranslateResult:
    """Translate the chain by t*w, t in (0, t1], so its support avoids the atoms
    of mu and no piece lies inside the line.

    Scans a 64-point grid on (0, t1], refining twice on failure; the flat cost
    certificate is t (2 mass + boundary mass), the affine-homotopy bound for a
    unit translation direction. The connector chain (segments from the shifted
    boundary atoms back to the originals) is the exact remainder:
    T - tau_t T = d(-H(T)) + connectors.
    """
    if t1 <= 0:
        raise StructureError("translation budget must be positive")
    plane = p_chain.space if isinstance(p_chain.space, NormedPlane) else NormedPlane("l2")
    w = _candidate_direction(p_chain, line, plane)
    m = p_chain.boundary()

    for level in range(3):
        grid = 64 ** (level + 1)
        for j in range(1, 65):
            t = t1 * j / grid
            shift = AffineMap.translation((t * w[0], t * w[1]))
            cand = pushforward(p_chain, shift)
            ok = True
            for piece in cand.pieces:
                a, b = _piece_coords(cand, piece)
                if line is not None and piece_inside_line(a, b, line):
                    ok = False
                    break
                for p in mu.points():
                    if _seg_point_dist(p, a, b) <= GEOM_EPS:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                connectors = _connector_chain(p_chain, m, (t * w[0], t * w[1]), plane)
                cert = t * (2.0 * p_chain.mass() + m.mass0())
                return TranslateResult(chain=cand, t=t, w=w, flat_cert=cert,
                                       connectors=connectors)
    raise NoAdmissibleShift("all grid shifts hit the atoms or the line after 3 refinements")


def _connector_chain(p_chain: Chain1, m: Molecule, tv, plane: NormedPlane) -> Chain1:
    """Exact remainder of a translation: -H(dT) = sum_j (-w_j) [x_j -> x_j + tv]."""
    segs = []
    for p, wgt in m.atoms:
        q = p if isinstance(p, tuple) else p_chain.coords_of(p)
        segs.append((q, (q[0] + tv[0], q[1] + tv[1]), -wgt))
    return Chain1.from_segments(plane, segs)


# ---------------------------------------------------------------------------
# tent lift off a line


def _tent_height(length: float, eps: float, plane: NormedPlane, a, b, nrm) -> float:
    """Height h with tent length (via the apex at mid + h n) = (1 + eps) * base length."""
    if plane.tag == "l2":
        return 0.5 * length * math.sqrt((1.0 + eps) ** 2 - 1.0)
    mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)

    def factor(h):
        apex = (mid[0] + h * nrm[0], mid[1] + h * nrm[1])
        return (plane.dist(a, apex) + plane.dist(apex, b)) / length

    lo, hi = 0.0, 2.0 * length
    while factor(hi) < 1.0 + eps:
        hi *= 2.0
    for _ in range(80):
        midh = (lo + hi) / 2
        if factor(midh) < 1.0 + eps:
            lo = midh
        else:
            hi = midh
    return lo


def lift_off_line(chain: Chain1, line: Line, mu: AtomicMeasure, eps: float) -> Chain1:
    """Replace every positive-length piece inside the line by an isoceles tent.

    The apex sits at height h off the line, with h solved from the (1 + eps)
    mass factor (sqrt(L^2 + 4 h^2) <= (1+eps) L in the euclidean plane); the
    height is walked down a 64-point grid if a tent segment hits an atom of mu.
    Pieces not inside the line pass through unchanged.
    """
    plane = chain.space if isinstance(chain.space, NormedPlane) else NormedPlane("l2")
    nrm = line.normal()
    out = []
    for piece in chain.pieces:
        a, b = _piece_coords(chain, piece)
        if not piece_inside_line(a, b, line, tol=TOL) or piece.weight == 0.0:
            out.append(piece)
            continue
        length = plane.dist(a, b)
        h0 = _tent_height(length, eps, plane, a, b, nrm)
        mid = ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)
        placed = False
        for j in range(64):
            h = h0 * (1.0 - j / 64.0)
            if h <= 0:
                break
            apex = (mid[0] + h * nrm[0], mid[1] + h * nrm[1])
            clean = True
            for p in mu.points():
                if (_atom_on_interior(p, a, apex) or _atom_on_interior(p, apex, b)
                        or (abs(p[0] - apex[0]) <= GEOM_EPS and abs(p[1] - apex[1]) <= GEOM_EPS)):
                    clean = False
                    break
            if clean:
                out.append(Piece(a, apex, piece.weight, plane.dist(a, apex)))
                out.append(Piece(apex, b, piece.weight, plane.dist(apex, b)))
                placed = True
                break
        if not placed:
            raise NoAdmissibleShift("no tent height clears the atomic measure")
    return Chain1(plane, out, validate=False)


# ---------------------------------------------------------------------------
# rectifiable filling


@dataclass(frozen=True)
class FillingRound:
    index: int
    action: str
    added_mass: float
    remainder_mass: float
    budget: float


@dataclass(frozen=True)
class RectifiableFilling:
    chain: Chain1
    rounds: tuple[FillingRound, ...]
    boundary_gap: float  # AE norm of d(R) - d(T); 0 when the tail was absorbed


def rectifiable_filling(t_chain: Chain1, eps: float, mu: AtomicMeasure,
                        line: Optional[Line], max_rounds: int = 40) -> RectifiableFilling:
    """Chain R with dR = dT, mass(R) <= (1 + eps) mass(T), support avoiding the
    atoms of mu (piece interiors) and never lying inside the line.

    Round structure: pieces inside the line are first tent-lifted (boundary
    preserved exactly, mass factor 1 + eps/2); remaining atom collisions are
    resolved by translating the current remainder and keeping the exact
    connector chains as the next remainder, with geometrically shrinking
    budgets. The final remainder is absorbed exactly once admissible, so the
    boundary gap is zero in the generic case.
    """
    if eps <= 0:
        raise StructureError("eps must be positive")
    plane = t_chain.space if isinstance(t_chain.space, NormedPlane) else NormedPlane("l2")
    total_mass = t_chain.mass()
    if total_mass == 0.0:
        return RectifiableFilling(Chain1.empty(plane), (), 0.0)

    remaining = t_chain
    if line is not None and not is_admissible(t_chain, AtomicMeasure.empty(), line):
        remaining = lift_off_line(t_chain, line, mu, eps / 2.0)

    acc: list[Piece] = []
    rounds: list[FillingRound] = []
    budget_total = total_mass * eps / 4.0
    for n in range(max_rounds):
        if is_admissible(remaining, mu, line):
            acc.extend(remaining.pieces)
            rounds.append(FillingRound(n, "absorb", remaining.mass(), 0.0, 0.0))
            return RectifiableFilling(Chain1(plane, acc, validate=False),
                                      tuple(rounds), 0.0)
        eps_n = budget_total * 2.0 ** (-(n + 1))
        m0 = remaining.boundary().mass0()
        t1 = eps_n / (2.0 * remaining.mass() + m0) if (remaining.mass() + m0) > 0 else eps_n
        res = translate_singular(remaining, mu, line, t1)
        acc.extend(res.chain.pieces)
        remaining = res.connectors
        rounds.append(FillingRound(n, "translate", res.chain.mass(),
                                   remaining.mass(), eps_n))
        if remaining.mass() <= 1e-9 * total_mass:
            mb = remaining.boundary()
            gap = ae_norm(mb, plane).value if mb.atoms else 0.0
            acc_chain = Chain1(plane, acc, validate=False)
            return RectifiableFilling(acc_chain, tuple(rounds), float(gap))
    raise StructureError("IterationBudget: 40 rounds were not enough")


# ---------------------------------------------------------------------------
# normalization (hyperplane case)


@dataclass(frozen=True)
class NormalizeResult:
    n_chain: Chain1
    r_chain: Chain1
    b_set: ClosedSet
    mass_ratio: float
    boundary_residual: float
    rounds: tuple[FillingRound, ...] = ()


def line_filling(m: Molecule, line: Line, plane: NormedPlane) -> Chain1:
    """Minimal filling of a molecule supported on a line, within the line.

    Builds the path graph of the sorted atom positions and routes the molecule
    by min-cost flow (the transport module), then maps edges back to plane
    segments. Optimal on a line: mass equals the AE norm under the line metric.
    """
    if not m.atoms:
        return Chain1.empty(plane)
    direction = line.direction()
    dnorm = plane.norm(direction)
    direction = (direction[0] / dnorm, direction[1] / dnorm)
    coords = []
    for p, _ in m.atoms:
        if not line.contains(p, tol=1e-7):
            raise StructureError(f"atom {p} is not on the line")
        coords.append(p)
    svals = {p: p[0] * direction[0] + p[1] * direction[1] for p in coords}
    order = sorted(coords, key=lambda p: svals[p])
    index = {p: i for i, p in enumerate(order)}
    edges = []
    for i in range(len(order) - 1):
        ln = plane.dist(order[i], order[i + 1])
        if ln > 0:
            edges.append((i, i + 1, ln))
    if not edges:
        return Chain1.empty(plane)
    graph = MetricGraph([list(p) for p in order], edges, ambient="path")
    gm = Molecule([(index[p], w) for p, w in m.atoms])
    fill = minimal_filling(gm, graph)
    segs = []
    for piece in fill.chain.pieces:
        segs.append((order[piece.start], order[piece.end], piece.weight))
    return Chain1.from_segments(plane, segs)


def sample_support_measure(t_chain: Chain1) -> AtomicMeasure:
    """Atoms sampling the support of the chain: piece endpoints and midpoints."""
    pts = []
    for piece in t_chain.pieces:
        a, b = _piece_coords(t_chain, piece)
        pts.extend([a, b, ((a[0] + b[0]) / 2, (a[1] + b[1]) / 2)])
    seen = []
    out = []
    for p in pts:
        if p not in seen:
            seen.append(p)
            out.append(p)
    return AtomicMeasure.of(out)


def normalize(t_chain: Chain1, line: Line, eps: float) -> NormalizeResult:
    """Theorem of the hyperplane case: N = T - R with dN = 0,
    mass(N) <= (2 + eps) mass(T), and N restricted to the line equal to T.

    R fills dT inside the line at minimal mass (at most mass(T), since the
    boundary operator has norm one), lifted off the line by tents whose mass
    factor is 1 + 0.9 eps; R touches the line only at finitely many endpoints,
    so the restriction of N to the line reproduces T exactly.
    """
    if eps <= 0:
        raise StructureError("eps must be positive")
    plane = t_chain.space if isinstance(t_chain.space, NormedPlane) else NormedPlane("l2")
    for piece in t_chain.pieces:
        a, b = _piece_coords(t_chain, piece)
        if not (line.contains(a, tol=TOL) and line.contains(b, tol=TOL)):
            raise StructureError("chain must be supported on the line")

    b_set = line.as_closed_set()
    if not t_chain.pieces:
        return NormalizeResult(t_chain, Chain1.empty(plane), b_set, 0.0, 0.0)

    m = t_chain.boundary()
    mu = sample_support_measure(t_chain)
    if not m.atoms:
        r = RectifiableFilling(Chain1.empty(plane), (), 0.0)
    else:
        base = line_filling(m, line, plane)
        lifted = lift_off_line(base, line, mu, 0.9 * eps)
        r = rectifiable_filling(lifted, 0.1 * eps, mu, line)
    n_chain = t_chain + r.chain.scale(-1.0)
    bres = ae_norm(n_chain.boundary(), plane).value if n_chain.boundary().atoms else 0.0
    ratio = n_chain.mass() / t_chain.mass() if t_chain.mass() > 0 else 0.0
    return NormalizeResult(n_chain=n_chain, r_chain=r.chain, b_set=b_set,
                           mass_ratio=float(ratio), boundary_residual=float(bres),
                           rounds=r.rounds)


def fat_cantor_chain(k: int, plane: Optional[NormedPlane] = None,
                     weight: float = 1.0) -> Chain1:
    """Stage-k fat-Cantor intervals on the x-axis as a chain."""
    from .currents import fat_cantor_intervals
    plane = plane or NormedPlane("l2")
    segs = [((a, 0.0), (b, 0.0), weight) for a, b in fat_cantor_intervals(k)]
    return Chain1.from_segments(plane, segs)
