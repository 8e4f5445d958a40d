"""Command line front end: graph JSON in, deterministic reports out.

Subcommands: index (k-step index levels), residue (limit coefficients),
kasparov (Gram, projection, commutator checks), kms (invariant traces and
the exchange defect).  Reports are byte-identical across runs with the
same inputs; timing data is added only on request.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from fractions import Fraction

import numpy as np

from .algebra import AlgebraElement
from .bimodule import Edge, GraphBimodule, GraphStructureError, beta_is_central, index_element
from .cuntz_pimsner import (
    ConditionalExpectation,
    ResidueConfig,
    ResidueUncertifiedError,
    SpanningElement,
    commutator_check,
    gram,
    projection_p,
    theta_projection_matrix,
)
from .fock import Path, make_path, paths
from .kms import invariant_traces, kms_check, state_phi_d
from .spectral import eta_tilde

SCHEMA_VERSION = 1


class CliError(Exception):
    pass


def load_graph(path: str) -> GraphBimodule:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}")
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise CliError(
            f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        )
    if not isinstance(doc, dict):
        raise CliError(f"{path}: top level must be an object")
    verts = doc.get("vertices")
    if not isinstance(verts, list) or not all(isinstance(v, str) for v in verts):
        raise CliError(f"{path}: 'vertices' must be a list of strings")
    raw_edges = doc.get("edges")
    if not isinstance(raw_edges, list):
        raise CliError(f"{path}: 'edges' must be a list")
    edges = []
    for i, item in enumerate(raw_edges):
        if not isinstance(item, dict):
            raise CliError(f"{path}: edges[{i}] must be an object")
        fields = {}
        for name, keys in (("id", ("id",)), ("r", ("r", "range")), ("s", ("s", "source"))):
            present = [k for k in keys if k in item]
            if not present:
                raise CliError(f"{path}: edges[{i}] missing key '{keys[0]}'")
            value = item[present[0]]
            if not isinstance(value, str):
                raise CliError(f"{path}: edges[{i}].{present[0]} must be a string")
            fields[name] = value
        weight = item.get("weight", 1.0)
        if not isinstance(weight, (int, float)) or isinstance(weight, bool):
            raise CliError(f"{path}: edges[{i}].weight must be a number")
        try:
            edges.append(Edge(fields["id"], fields["r"], fields["s"], float(weight)))
        except ValueError as exc:
            raise CliError(f"{path}: edges[{i}]: {exc}")
    try:
        return GraphBimodule(verts, edges)
    except GraphStructureError as exc:
        raise CliError(f"{path}: {exc}")


def _clean(obj):
    """Make a report JSON-safe and deterministic."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        obj = obj.item()
    if isinstance(obj, complex):
        return {"re": _clean(obj.real), "im": _clean(obj.imag)}
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    return obj


def _flatten(obj, prefix, rows):
    if isinstance(obj, dict):
        for k in sorted(obj):
            _flatten(obj[k], f"{prefix}.{k}" if prefix else str(k), rows)
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            _flatten(v, f"{prefix}[{i}]", rows)
    else:
        rows.append((prefix, obj))


def emit(report: dict, fmt: str) -> None:
    report = _clean(report)
    if fmt == "json":
        sys.stdout.write(json.dumps(report, indent=2, sort_keys=True, allow_nan=False))
        sys.stdout.write("\n")
    else:
        rows: list[tuple[str, object]] = []
        _flatten(report, "", rows)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in rows:
            writer.writerow([key, value])
        sys.stdout.write(buf.getvalue())


def _algebra_dict(a) -> dict:
    out = {}
    for v, x in a.as_dict().items():
        out[v] = x.real if abs(x.imag) < 1e-300 or x.imag == 0 else x
    return out


def cmd_index(args) -> int:
    module = load_graph(args.graph)
    start = time.perf_counter()
    failures: list[str] = []
    beta = index_element(module)
    central = beta_is_central(module)
    # one adjacency pass; calling beta_k per level would be quadratic in depth
    B = module.adjacency()
    vec = np.ones(len(module.vertices))
    levels = {}
    worst = 0.0
    for k in range(args.depth + 1):
        level = AlgebraElement(module.vertices, vec)
        levels[str(k)] = _algebra_dict(level)
        if central:
            worst = max(worst, (level - beta.power(k)).norm())
        vec = B @ vec
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "index",
        "graph": args.graph,
        "parameters": {"depth": args.depth, "tol": args.tol},
        "vertices": list(module.vertices),
        "edges": [g.id for g in module.edges],
        "index": _algebra_dict(beta),
        "central": central,
    }
    if central:
        # a central index collapses every level to a plain power
        report["central_collapse_max_error"] = worst
        if worst > args.tol:
            failures.append(f"central collapse error {worst} exceeds {args.tol}")
    report["levels"] = levels
    report["failures"] = failures
    if args.timings:
        report["timings"] = {"seconds": time.perf_counter() - start}
    emit(report, args.format)
    return 1 if failures else 0


def _residue_entry(module, target, args) -> dict:
    rep = eta_tilde(
        module,
        target,
        k_max=args.kmax,
        tol=args.tol,
        force_iterative=args.force_iterative,
    )
    stride = max(1, len(rep.samples) // 64)
    samples = [list(p) for p in rep.samples[::stride]]
    r, s, n = rep.target
    return {
        "target": {"range": r, "source": s, "length": n},
        "value": rep.value,
        "converged": rep.converged,
        "method": rep.method,
        "delta": rep.delta,
        "r_squared": rep.r_squared,
        "rate_alpha": rep.rate_alpha,
        "k_max": rep.k_max,
        "sample_stride": stride,
        "samples": samples,
    }


def cmd_residue(args) -> int:
    module = load_graph(args.graph)
    start = time.perf_counter()
    if re.fullmatch(r"\d+", args.target):
        n = int(args.target)
        pool = paths(module, n)
        if not pool:
            raise CliError(f"no paths of length {n}")
    else:
        ids = [t for t in args.target.split(",") if t]
        try:
            pool = [make_path(module, ids)]
        except (KeyError, ValueError) as exc:
            raise CliError(f"bad target {args.target!r}: {exc}")
        n = len(pool[0])
    entries = {}
    for r, s in sorted({(p.r, p.s) for p in pool}):
        entries[(r, s)] = _residue_entry(module, (r, s, n), args)
    rows = []
    for p in sorted(pool, key=lambda q: q.sort_key()):
        cls = entries[(p.r, p.s)]
        rows.append(
            {
                "path": p.label(),
                "edges": list(p.ids),
                "range": p.r,
                "source": p.s,
                "length": n,
                "value": cls["value"],
                "converged": cls["converged"],
                "method": cls["method"],
                "delta": cls["delta"],
            }
        )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "residue",
        "graph": args.graph,
        "parameters": {
            "target": args.target,
            "kmax": args.kmax,
            "tol": args.tol,
            "force_iterative": args.force_iterative,
        },
        "paths": rows,
        "classes": list(entries.values()),
    }
    if args.timings:
        report["timings"] = {"seconds": time.perf_counter() - start}
    emit(report, args.format)
    return 0


def cmd_kasparov(args) -> int:
    module = load_graph(args.graph)
    start = time.perf_counter()
    failures: list[str] = []
    cfg = ResidueConfig(k_max=args.kmax, tol=args.tol)
    expectation = ConditionalExpectation(module, cfg)
    try:
        gdata = gram(module, args.depth, expectation)
        pdata = projection_p(module, args.depth, expectation, gdata)
        theta = theta_projection_matrix(module, args.depth, expectation)
    except ResidueUncertifiedError as exc:
        emit(
            {
                "schema_version": SCHEMA_VERSION,
                "command": "kasparov",
                "graph": args.graph,
                "parameters": {"depth": args.depth, "kmax": args.kmax, "tol": args.tol},
                "failures": [str(exc)],
            },
            args.format,
        )
        return 1
    theta_defect = float(np.max(np.abs(theta - pdata.matrix)))
    iso_defect = gdata.isometry_defect()
    if min(gdata.psd_min) < -args.tol:
        failures.append(f"gram not positive: min eigenvalue {min(gdata.psd_min)}")
    if iso_defect > args.tol:
        failures.append(f"path block not isometric: defect {iso_defect}")
    if gdata.hermitian_defect > args.tol:
        failures.append(f"gram not hermitian: defect {gdata.hermitian_defect}")
    if pdata.idempotency_defect > args.tol:
        failures.append(f"projection not idempotent: {pdata.idempotency_defect}")
    if pdata.adjoint_defect > args.tol:
        failures.append(f"projection not gram-adjoint: {pdata.adjoint_defect}")
    if theta_defect > args.tol:
        failures.append(f"projection routes disagree: {theta_defect}")
    commutators = []
    for rep in commutator_check(module, args.depth, expectation):
        commutators.append(
            {
                "edge": rep.edge,
                "discrepancy": rep.discrepancy,
                "ranks": rep.ranks,
                "total_rank": rep.total_rank,
                "predicted": rep.predicted,
                "predicted_total": rep.predicted_total,
                "matches": rep.matches,
            }
        )
        if rep.discrepancy > args.tol:
            failures.append(f"commutator {rep.edge}: routes differ by {rep.discrepancy}")
        if not rep.matches:
            failures.append(
                f"commutator {rep.edge}: rank {rep.total_rank} != predicted {rep.predicted_total}"
            )
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "kasparov",
        "graph": args.graph,
        "parameters": {"depth": args.depth, "kmax": args.kmax, "tol": args.tol},
        "basis_size": len(gdata.basis),
        "gram": {
            "psd_min": {v: m for v, m in zip(gdata.vertex_names, gdata.psd_min)},
            "hermitian_defect": gdata.hermitian_defect,
            "isometry_defect": iso_defect,
            "ranks": {v: r for v, r in zip(gdata.vertex_names, gdata.gram_ranks)},
        },
        "projection": {
            "idempotency_defect": pdata.idempotency_defect,
            "adjoint_defect": pdata.adjoint_defect,
            "theta_defect": theta_defect,
        },
        "commutators": commutators,
        "failures": failures,
    }
    if args.timings:
        report["timings"] = {"seconds": time.perf_counter() - start}
    emit(report, args.format)
    return 1 if failures else 0


def cmd_kms(args) -> int:
    module = load_graph(args.graph)
    start = time.perf_counter()
    failures: list[str] = []
    family = invariant_traces(module)
    report = {
        "schema_version": SCHEMA_VERSION,
        "command": "kms",
        "graph": args.graph,
        "parameters": {
            "pairs": args.pairs,
            "length": args.length,
            "seed": args.seed,
            "tol": args.tol,
        },
        "feasible": family.feasible,
        "dimension": family.dimension,
        "generators": [dict(t) for t in family.basis],
    }
    if family.feasible and family.canonical is not None:
        trace = family.canonical
        report["canonical"] = dict(trace.weights)
        report["canonical_float"] = trace.float_weights()
        phi_d_rows = []
        for k in range(3):
            for p in paths(module, k):
                x = SpanningElement.symbol(module, p, p)
                phi_d_rows.append(
                    {
                        "path": p.label(),
                        "length": k,
                        "value": complex(state_phi_d(trace, x)).real,
                    }
                )
        report["phi_d"] = phi_d_rows
        rng = np.random.default_rng(args.seed)
        pool: list[Path] = []
        for k in range(args.length + 1):
            pool.extend(paths(module, k))
        by_source: dict[str, list[Path]] = {}
        for p in pool:
            by_source.setdefault(p.s, []).append(p)
        worst = 0.0
        for _ in range(args.pairs):
            mu = pool[int(rng.integers(len(pool)))]
            nu_pool = by_source[mu.s]
            nu = nu_pool[int(rng.integers(len(nu_pool)))]
            sig = pool[int(rng.integers(len(pool)))]
            rho_pool = by_source[sig.s]
            rho = rho_pool[int(rng.integers(len(rho_pool)))]
            x = SpanningElement.symbol(module, mu, nu)
            y = SpanningElement.symbol(module, sig, rho)
            worst = max(worst, kms_check(module, trace, x, y))
        report["residual_max"] = worst
        if worst > args.tol:
            failures.append(f"exchange defect {worst} exceeds {args.tol}")
    report["failures"] = failures
    if args.timings:
        report["timings"] = {"seconds": time.perf_counter() - start}
    emit(report, args.format)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graphbimod",
        description="Index, residue, projection, and trace reports for finite graph bimodules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("graph", help="path to a graph JSON file")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, default=1e-10)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument(
            "--timings",
            action="store_true",
            help="include wall-clock timings (breaks byte-identical output)",
        )

    p_index = sub.add_parser("index", help="index element and its k-step levels")
    common(p_index)
    p_index.add_argument("--depth", type=int, default=3)
    p_index.set_defaults(func=cmd_index)

    p_res = sub.add_parser("residue", help="residue limits of growth ratios")
    common(p_res)
    p_res.add_argument(
        "--target",
        required=True,
        help="integer degree (all classes) or comma-separated edge ids (one path)",
    )
    p_res.add_argument("--kmax", type=int, default=200)
    p_res.add_argument("--force-iterative", action="store_true")
    p_res.set_defaults(func=cmd_residue)

    p_kas = sub.add_parser("kasparov", help="gram, projection, and commutator checks")
    common(p_kas)
    p_kas.add_argument("--depth", type=int, default=3)
    p_kas.add_argument("--kmax", type=int, default=200)
    p_kas.set_defaults(func=cmd_kasparov)

    p_kms = sub.add_parser("kms", help="invariant traces and the exchange defect")
    common(p_kms)
    p_kms.add_argument("--pairs", type=int, default=200)
    p_kms.add_argument("--length", type=int, default=3)
    p_kms.set_defaults(func=cmd_kms)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
