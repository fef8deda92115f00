"""Batch front-end: subcommand dispatch, JSON/CSV I/O, deterministic reports.

Exit codes: 0 success, 1 input error, 2 invariant violation. Reports are
byte-identical across runs with identical configuration; every fuzzed report
embeds its seed. Logging level comes from CURRENT1D_LOG in {off, info, debug}.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import io as cio
from .approximation import approximate, truncate
from .currents import CurrentError, Polyline, restrict, standard_panel
from .decomposition import EdgeFlow, decompose_flow, fragment_representation
from .flatnorm import CubicalComplex, GridError, flat_norm, snap
from .homotopy import AffineBicombing, fill_residual, homotopy_fill
from .rickman import rug_grid
from .spaces import GeometryError, MetricGraph, NormedPlane
from .solvers import Infeasible, IterationLimit, SolverError
from .structure import Line, StructureError, normalize
from .transport import TransportError, ae_norm, isomorphism_check, minimal_filling

log = logging.getLogger("current1d")

_KNOWN_KEYS = {"seed", "tol", "out", "format", "space", "molecule", "chain",
               "curve0", "curve1", "grid", "origin", "eps", "mesh",
               "length_cap", "hyperplane", "flow", "closedset", "input",
               "panel_seed", "quad_tol", "s_grid", "n", "alpha", "metric"}


class CliInputError(ValueError):
    pass


def _setup_logging():
    level = os.environ.get("CURRENT1D_LOG", "off").lower()
    if level == "debug":
        logging.basicConfig(level=logging.DEBUG)
    elif level == "info":
        logging.basicConfig(level=logging.INFO)
    else:
        logging.disable(logging.CRITICAL)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError as exc:
        raise CliInputError(f"no such file: {path}") from exc
    except json.JSONDecodeError as exc:
        raise CliInputError(
            f"{path}: malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc


def _emit(args, payload, rows=None, columns=None) -> None:
    if getattr(args, "format", "json") == "csv" and rows is not None:
        text = cio.csv_rows(rows, columns)
    else:
        text = cio.dump_report(payload)
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _apply_config(args: argparse.Namespace) -> argparse.Namespace:
    if getattr(args, "config", None):
        doc = _load_json(args.config)
        unknown = set(doc) - _KNOWN_KEYS
        if unknown:
            raise CliInputError(f"unknown config keys: {sorted(unknown)}")
        for k, v in doc.items():
            if getattr(args, k, None) in (None, argparse.SUPPRESS):
                setattr(args, k, v)
    return args


# ---------------------------------------------------------------------------
# subcommand handlers (return exit code)


def _cmd_ae_norm(args) -> int:
    space = cio.load_space(_load_json(args.space))
    m = cio.load_molecule(_load_json(args.molecule))
    if isinstance(space, MetricGraph):
        metric = space.path_dist if args.metric == "path" else space.ambient_dist
    elif isinstance(space, NormedPlane):
        metric = space
    else:
        metric = space.dist
    res = ae_norm(m, metric)
    if isinstance(metric, np.ndarray):
        dist = lambda p, q: float(metric[p, q])
    else:
        dist = metric.dist
    lip_ok = True
    pts = list(res.potential)
    for i in pts:
        for j in pts:
            d = dist(i, j)
            if np.isfinite(d) and np.isfinite(res.potential[i]):
                lip_ok &= abs(res.potential[i] - res.potential[j]) <= d + 1e-9
    pairing = sum(w * res.potential[p] for p, w in m.atoms)
    dual_ok = pairing >= res.value - 1e-7 * max(1.0, res.value)
    report = {
        "value": res.value,
        "coupling": [[list(p) if isinstance(p, tuple) else p,
                      list(q) if isinstance(q, tuple) else q, w]
                     for p, q, w in res.coupling],
        "potential": {str(k): v for k, v in res.potential.items()},
        "lipschitz_ok": bool(lip_ok),
        "duality_ok": bool(dual_ok),
    }
    _emit(args, report)
    return 0 if (lip_ok and dual_ok) else 2


def _cmd_filling(args) -> int:
    g = cio.load_space(_load_json(args.space))
    if not isinstance(g, MetricGraph):
        raise CliInputError("filling needs a graph space")
    m = cio.load_molecule(_load_json(args.molecule))
    fill = minimal_filling(m, g)
    ae_intr = ae_norm(m, g.path_dist).value
    identity_ok = abs(fill.mass_value - ae_intr) <= 1e-7 * max(1.0, fill.mass_value)
    bnd = fill.chain.boundary()
    bnd_ok = bnd == m
    report = {
        "mass": fill.mass_value,
        "ae_intrinsic": ae_intr,
        "identity_ok": bool(identity_ok),
        "boundary_ok": bool(bnd_ok),
        "chain": cio.dump_chain(fill.chain),
    }
    _emit(args, report)
    return 0 if (identity_ok and bnd_ok) else 2


def _cmd_iso_check(args) -> int:
    g = cio.load_space(_load_json(args.space))
    if not isinstance(g, MetricGraph):
        raise CliInputError("iso-check needs a graph space")
    t = cio.load_chain(_load_json(args.chain), space=g)
    rep = isomorphism_check(t, g, tol=args.tol or 1e-7)
    report = {
        "ae_ambient": rep.ae_ambient, "ae_intrinsic": rep.ae_intrinsic,
        "filling_mass": rep.filling_mass, "qc": rep.qc, "ratio": rep.ratio,
        "lower_ok": rep.lower_ok, "upper_ok": rep.upper_ok,
        "ae_lower_ok": rep.ae_lower_ok, "identity_ok": rep.identity_ok,
    }
    _emit(args, report)
    return 0 if rep.all_ok() else 2


def _cmd_flatnorm(args) -> int:
    try:
        nx, ny, h = args.grid.split(",")
        nx, ny, h = int(nx), int(ny), float(h)
    except (AttributeError, ValueError) as exc:
        raise CliInputError(f"bad --grid (want nx,ny,h): {args.grid!r}") from exc
    origin = (0.0, 0.0)
    if args.origin:
        ox, oy = args.origin.split(",")
        origin = (float(ox), float(oy))
    cx = CubicalComplex(origin=origin, h=h, nx=nx, ny=ny)
    chain = cio.load_chain(_load_json(args.chain))
    if isinstance(chain, Polyline):
        chain = chain.as_chain(NormedPlane("l2"))
    t = snap(chain, cx)
    res = flat_norm(t, cx)
    recon_ok = bool(np.max(np.abs(t - (res.r + cx.d2_matrix() @ res.s))) <= 1e-8)
    mass_ok = res.value <= float(np.sum(np.abs(t)) * h) + 1e-8
    report = {
        "value": res.value,
        "label": "complex flat norm",  # an upper approximation of the continuum value
        "residual_edges": [[int(e), float(v)] for e, v in enumerate(res.r) if abs(v) > 1e-12],
        "faces": [[int(f), float(v)] for f, v in enumerate(res.s) if abs(v) > 1e-12],
        "reconstruction_ok": recon_ok,
        "mass_bound_ok": bool(mass_ok),
        "iterations": res.iterations,
    }
    _emit(args, report)
    return 0 if (recon_ok and mass_ok) else 2


def _cmd_homotopy(args) -> int:
    g0 = cio.load_chain(_load_json(args.curve0))
    g1 = cio.load_chain(_load_json(args.curve1))
    if not isinstance(g0, Polyline) or not isinstance(g1, Polyline):
        raise CliInputError("homotopy expects polyline documents")
    plane = NormedPlane("l2")
    bic = AffineBicombing(plane)
    fill = homotopy_fill(g0, g1, bic, quad_tol=args.quad_tol or 1e-8)
    seed = args.panel_seed if args.panel_seed is not None else 0
    scale = float(np.abs(np.vstack([g0.points, g1.points])).max() or 1.0)
    panel = standard_panel(seed, count=20, scale=scale)
    worst = 0.0
    ok = True
    for form in panel:
        allowed = 1e-6 * (1.0 + form.lip_pi * form.sup_f)
        resid = fill_residual(g0, g1, fill, form, plane)
        worst = max(worst, resid)
        ok &= resid <= allowed
    ok &= fill.measured_s <= fill.cert_s + 1e-6
    ok &= fill.r_chain.mass() <= fill.cert_r + 1e-9
    report = {
        "seed": seed,
        "cert_s": fill.cert_s, "cert_r": fill.cert_r,
        "measured_s": fill.measured_s, "measured_r": fill.measured_r,
        "d_inf": fill.d_inf, "worst_residual": worst,
        "bounds_ok": bool(ok),
    }
    _emit(args, report)
    return 0 if ok else 2


def _cmd_approx(args) -> int:
    cm = cio.load_curvemeasure(_load_json(args.input))
    if args.length_cap:
        cm, trunc_err = truncate(cm, float(args.length_cap))
    else:
        trunc_err = 0.0
    eps = float(args.eps if args.eps is not None else 0.1)
    mesh = float(args.mesh if args.mesh is not None else 0.25)
    p, cert = approximate(cm, eps=eps, mesh=mesh)
    mass_ok = cert.mass_p <= cert.mass_n + 1e-9
    report = {
        "eps": eps, "mesh": mesh,
        "truncation_error": trunc_err,
        "clustering_term": cert.clustering_term,
        "interpolation_term": cert.interpolation_term,
        "flat_bound": cert.flat_bound + trunc_err,
        "mass_p": cert.mass_p, "mass_n": cert.mass_n,
        "mass_ok": bool(mass_ok),
        "n_clusters": len(cert.clusters),
        "chain": cio.dump_chain(p),
    }
    _emit(args, report)
    return 0 if mass_ok else 2


def _cmd_normalize(args) -> int:
    chain = cio.load_chain(_load_json(args.chain))
    if isinstance(chain, Polyline):
        chain = chain.as_chain(NormedPlane("l2"))
    try:
        a, b, c = map(float, args.hyperplane.split(","))
    except (AttributeError, ValueError) as exc:
        raise CliInputError(f"bad --hyperplane (want a,b,c): {args.hyperplane!r}") from exc
    eps = float(args.eps if args.eps is not None else 0.1)
    res = normalize(chain, Line(a, b, c), eps)
    frag = restrict(res.n_chain, res.b_set)
    restrict_err = abs(frag.mass() - chain.mass())
    ok = (res.boundary_residual <= 1e-9
          and res.mass_ratio <= 2.0 + eps + 1e-9
          and restrict_err <= 1e-9)
    report = {
        "eps": eps,
        "mass_ratio": res.mass_ratio,
        "boundary_residual": res.boundary_residual,
        "restriction_mass_error": restrict_err,
        "rounds": [{"index": r.index, "action": r.action,
                    "added_mass": r.added_mass,
                    "remainder_mass": r.remainder_mass, "budget": r.budget}
                   for r in res.rounds],
        "n_chain": cio.dump_chain(res.n_chain),
        "r_chain": cio.dump_chain(res.r_chain),
        "ok": bool(ok),
    }
    _emit(args, report)
    return 0 if ok else 2


def _load_flow(args) -> EdgeFlow:
    g = cio.load_space(_load_json(args.space))
    if not isinstance(g, MetricGraph):
        raise CliInputError("decompose needs a graph space")
    doc = _load_json(args.flow)
    weights = doc.get("weights")
    if weights is None or len(weights) != len(g.edges):
        raise CliInputError("flow document needs one weight per graph edge")
    return EdgeFlow(g, tuple(float(w) for w in weights))


def _cmd_decompose(args) -> int:
    ef = _load_flow(args)
    d = decompose_flow(ef)
    err = float(np.max(np.abs(d.reassembled() - np.array(ef.weights)))) \
        if ef.weights else 0.0
    ok = err <= 1e-9 and abs(d.mass_defect) <= 1e-9
    rows = [{"kind": "path", "weight": w, "length": _route_len(ef.graph, v),
             "n_vertices": len(v)} for w, v in d.paths]
    rows += [{"kind": "cycle", "weight": w, "length": _route_len(ef.graph, v),
              "n_vertices": len(v)} for w, v in d.cycles]
    report = {
        "paths": [[w, list(v)] for w, v in d.paths],
        "cycles": [[w, list(v)] for w, v in d.cycles],
        "mass_defect": d.mass_defect,
        "reassembly_error": err,
        "ok": bool(ok),
    }
    _emit(args, report, rows=rows, columns=["kind", "weight", "length", "n_vertices"])
    return 0 if ok else 2


def _route_len(g: MetricGraph, verts) -> float:
    table = {}
    for u, v, ln in g.edges:
        table[(u, v)] = ln
        table[(v, u)] = ln
    return float(sum(table[(verts[i], verts[i + 1])] for i in range(len(verts) - 1)))


def _cmd_fragments(args) -> int:
    ef = _load_flow(args)
    e = cio.load_closedset(_load_json(args.closedset))
    d = decompose_flow(ef)
    rep = fragment_representation(d, e)
    ok = rep.mass_identity_residual <= 1e-9
    rows = []
    for w, frag in rep.fragments:
        fl = frag.fragments[0] if frag.fragments else None
        rows.append({
            "weight": w,
            "length": fl.polyline.length if fl else 0.0,
            "n_fragments": sum(len(f.domain) for f in frag.fragments),
            "fragment_mass": frag.mass(),
        })
    report = {
        "mass_identity_residual": rep.mass_identity_residual,
        "restricted_mass": rep.restricted_mass,
        "curves": rows,
        "ok": bool(ok),
    }
    _emit(args, report, rows=rows,
          columns=["weight", "length", "n_fragments", "fragment_mass"])
    return 0 if ok else 2


def _cmd_rickman(args) -> int:
    s_count = int(args.s_grid if args.s_grid is not None else 32)
    n = int(args.n if args.n is not None else 32)
    alpha = float(args.alpha if args.alpha is not None else 0.5)
    rows = rug_grid(s_count=s_count, n=n, alpha=alpha)
    ok = all(abs(r.ae_intrinsic - 2.0) <= 1e-6 for r in rows)
    row_dicts = [{"s": r.s, "ae_intrinsic": r.ae_intrinsic,
                  "ae_ambient": r.ae_ambient, "mass": r.mass,
                  "qc": r.qc} for r in rows]
    report = {"alpha": alpha, "n": n, "rows": row_dicts, "lower_bound_ok": bool(ok)}
    _emit(args, report, rows=row_dicts,
          columns=["s", "ae_intrinsic", "ae_ambient", "mass", "qc"])
    return 0 if ok else 2


def _cmd_suite(args) -> int:
    from .suite import run_all
    results = run_all(verbose=False)
    for r in results:
        sys.stderr.write(r.line() + "\n")
    passed = sum(1 for r in results if r.passed)
    # timing stays on stderr so the report is byte-identical across runs
    report = {
        "passed": passed,
        "failed": len(results) - passed,
        "criteria": [{"index": r.index, "name": r.name, "passed": r.passed}
                     for r in results],
    }
    _emit(args, report)
    return 0 if passed == len(results) else 2


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="current1d",
        description="Desk-scale computations with 1-dimensional metric currents.")
    ap.add_argument("--config", help="JSON config merged into the arguments")
    sub = ap.add_subparsers(dest="command")

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p = sub.add_parser("ae-norm", help="Arens-Eells norm of a molecule")
    p.add_argument("--space", required=True)
    p.add_argument("--molecule", required=True)
    p.add_argument("--metric", choices=["ambient", "path"], default="ambient")
    common(p)

    p = sub.add_parser("filling", help="minimal-mass filling of a molecule on a graph")
    p.add_argument("--space", required=True)
    p.add_argument("--molecule", required=True)
    common(p)

    p = sub.add_parser("iso-check", help="quasiconvexity sandwich for a chain's boundary")
    p.add_argument("--space", required=True)
    p.add_argument("--chain", required=True)
    common(p)

    p = sub.add_parser("flatnorm", help="LP flat norm on a cubical complex")
    p.add_argument("--grid", required=True, help="nx,ny,h")
    p.add_argument("--origin", default=None, help="x,y of the grid origin")
    p.add_argument("--chain", required=True)
    common(p)

    p = sub.add_parser("homotopy", help="certified filling of two polylines")
    p.add_argument("--curve0", required=True)
    p.add_argument("--curve1", required=True)
    p.add_argument("--panel-seed", dest="panel_seed", type=int, default=None)
    p.add_argument("--quad-tol", dest="quad_tol", type=float, default=None)
    common(p)

    p = sub.add_parser("approx", help="geodesic approximation of a curve measure")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--mesh", type=float, default=None)
    p.add_argument("--length-cap", dest="length_cap", type=float, default=None)
    common(p)

    p = sub.add_parser("normalize", help="boundaryless extension off a hyperplane")
    p.add_argument("--chain", required=True)
    p.add_argument("--hyperplane", required=True, help="a,b,c for the line ax+by=c")
    p.add_argument("--eps", type=float, default=None)
    common(p)

    p = sub.add_parser("decompose", help="flow decomposition into paths and cycles")
    p.add_argument("--space", required=True)
    p.add_argument("--flow", required=True)
    common(p)

    p = sub.add_parser("fragments", help="restrict decomposed curves to a closed set")
    p.add_argument("--space", required=True)
    p.add_argument("--flow", required=True)
    p.add_argument("--closedset", required=True)
    common(p)

    p = sub.add_parser("rickman", help="Rickman rug regression grid")
    p.add_argument("--s-grid", dest="s_grid", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    common(p)

    p = sub.add_parser("suite", help="run the acceptance battery")
    common(p)

    return ap


_HANDLERS = {
    "ae-norm": _cmd_ae_norm,
    "filling": _cmd_filling,
    "iso-check": _cmd_iso_check,
    "flatnorm": _cmd_flatnorm,
    "homotopy": _cmd_homotopy,
    "approx": _cmd_approx,
    "normalize": _cmd_normalize,
    "decompose": _cmd_decompose,
    "fragments": _cmd_fragments,
    "rickman": _cmd_rickman,
    "suite": _cmd_suite,
}


def main(argv=None) -> int:
    _setup_logging()
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    if not args.command:
        ap.print_usage(sys.stderr)
        return 1
    try:
        args = _apply_config(args)
        log.info("running %s", args.command)
        return _HANDLERS[args.command](args)
    except (CliInputError, cio.InputError, GeometryError, CurrentError,
            GridError, TransportError, StructureError, Infeasible,
            IterationLimit, SolverError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        sys.stderr.write(cio.dump_report(err))
        return 1


if __name__ == "__main__":
    sys.exit(main())
