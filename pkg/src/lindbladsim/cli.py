"""Batch front door: model files in, JSON/CSV artifacts out.

All outputs are deterministic given the inputs: rows are sorted before
emission, JSON keys are sorted, and runtime columns are zero unless --timing
is passed. Exit codes: 0 success, 2 validation error, 3 infeasible precision
or resource limit.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import metrics, modelio, models, series, timedep
from .errors import (ArgumentError, ContractError, InfeasiblePrecisionError, ModelError,
                     PauliParseError, ResourceLimitError)
from .quadrature import canonical_rule


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(float(x))
    return str(x)


def _write_csv(path, header, rows):
    def emit(fh):
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(c) for c in row])

    if path is None:
        emit(sys.stdout)
    else:
        with open(path, "w", newline="") as fh:
            emit(fh)


def _write_json(path, obj):
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _default_rho0(dim: int) -> np.ndarray:
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def _load_rho0(args, dim: int) -> np.ndarray:
    if args.rho0 is None:
        return _default_rho0(dim)
    return modelio.load_density(args.rho0, dim)


def _elapsed_ms(args, t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0 if args.timing else 0.0


def _cmd_simulate(args) -> int:
    pm = modelio.load_model(args.model)
    if pm.is_time_dependent:
        raise ModelError("model declares time dependence; use td-simulate")
    lind = pm.to_lindbladian()
    rho0 = _load_rho0(args, lind.dim)
    if args.verify and pm.n_qubits > 3:
        raise ArgumentError("--verify builds Choi matrices; limited to n_qubits <= 3")
    t0 = time.perf_counter()
    rho, report = series.simulate(lind, rho0, args.time, args.eps, verify=args.verify)
    out = {
        "report": report.as_dict(),
        "rho": modelio.matrix_to_json(rho),
        "runtime_ms": _elapsed_ms(args, t0),
    }
    _write_json(args.out, out)
    return 0


def _cmd_td_simulate(args) -> int:
    pm = modelio.load_model(args.model)
    tl = pm.to_time_dependent()
    rho0 = _load_rho0(args, tl.dim)
    cfg = None
    if (args.order is None) != (args.grid is None):
        raise ArgumentError("--order and --grid must be given together")
    if args.order is not None:
        cfg = timedep.DysonConfig(order=args.order, grid_points=args.grid)
    t0 = time.perf_counter()
    rho, report, used = timedep.td_simulate(tl, rho0, args.time, args.eps,
                                            cfg=cfg, segments=args.segments)
    out = {
        "report": report.as_dict(),
        "dyson": {"order": used.order, "grid_points": used.grid_points,
                  "declared_contract": timedep.dyson_contract(
                      tl, report.segment_time, used) if report.segments else 0.0},
        "rho": modelio.matrix_to_json(rho),
        "runtime_ms": _elapsed_ms(args, t0),
    }
    _write_json(args.out, out)
    return 0


def _sweep_models(args):
    named = []
    for path in args.model or []:
        pm = modelio.load_model(path)
        if pm.is_time_dependent:
            raise ModelError(f"{path}: time-dependent model not supported here")
        stem = path.rsplit("/", 1)[-1]
        stem = stem[:-5] if stem.endswith(".json") else stem
        named.append((stem, pm.to_lindbladian()))
    for i in range(args.random_models):
        name = f"random-{args.n_qubits}q-{args.seed}-{i}"
        named.append((name, models.random_lindbladian(
            args.n_qubits, num_jumps=1, seed=args.seed + i)))
    if not named:
        raise ArgumentError("need --model and/or --random-models")
    return named


def _analyze_row(name, lind, t, K, Kp, q, timing):
    t0 = time.perf_counter()
    cfg = series.TruncationConfig(series_order=K, taylor_order=Kp,
                                  quadrature_order=q, segment_time=t)
    S = series.CPMapApprox(lind, t, cfg).as_superoperator()
    E = models.exact_channel(lind, t)
    lower, upper = metrics.diamond_sandwich(E, S)
    beta = models.be_norm(lind)
    bq = sum(series.bound_quadrature(k, q, t, beta) for k in range(1, K + 1))
    runtime = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
    return (name, t, K, Kp, q, series.bound_duhamel(K, t, beta), bq,
            series.taylor_total_bound(Kp, t, beta), lower, upper, runtime)


def _cmd_analyze_error(args) -> int:
    named = _sweep_models(args)
    jobs = []
    for name, lind in named:
        for K in range(1, args.max_order + 1):
            qmin = max(1, math.ceil(K / 2))
            for q in (qmin, qmin + 2):
                for Kp in (K, 2 * K):
                    jobs.append((name, lind, args.time, K, Kp, q, args.timing))
    if args.workers > 1:
        with ThreadPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(lambda j: _analyze_row(*j), jobs))
    else:
        rows = [_analyze_row(*j) for j in jobs]
    rows.sort(key=lambda r: (r[0], r[1], r[2], r[3], r[4]))
    _write_csv(args.out,
               ["model", "t", "K", "Kp", "q", "bound_duhamel", "bound_quadrature",
                "bound_taylor", "choi_lower", "choi_upper", "runtime_ms"],
               rows)
    return 0


def _cmd_quadrature(args) -> int:
    rows = []
    for q in range(1, args.max_q + 1):
        for t in args.times:
            rule = canonical_rule(q, t)
            for ell in range(2 * q):
                lhs = math.fsum(w * s ** ell for w, s in zip(rule.weights, rule.nodes))
                rhs = t ** (ell + 1) / (ell + 1)
                rows.append((q, t, ell, lhs, rhs, abs(lhs - rhs) / abs(rhs)))
    _write_csv(args.out,
               ["q", "t", "ell", "moment_lhs", "moment_rhs", "residual"], rows)
    return 0


def _cmd_primitives_verify(args) -> int:
    from .primitives import verification_matrix
    matrix = verification_matrix(seed=args.seed)
    ok = all(v["pass"] for v in matrix.values())
    _write_json(args.out, {"checks": matrix, "all_pass": ok})
    return 0 if ok else 1


def _cmd_kraus_dump(args) -> int:
    pm = modelio.load_model(args.model)
    if pm.is_time_dependent:
        raise ModelError("model declares time dependence; use td-simulate")
    lind = pm.to_lindbladian()
    tstar = series.segment_time(lind, cap=args.time)
    n_seg = max(1, math.ceil(args.time / tstar - 1e-12))
    seg_t = args.time / n_seg
    cfg = series.choose_orders(lind, seg_t, args.eps / n_seg)
    cp = series.enumerate_kraus(lind, seg_t, cfg)
    rows = []
    for i, term in enumerate(cp.iter_terms()):
        k, ells, js = term.index
        rows.append((i, k,
                     "-".join(str(e) for e in ells) if ells else "",
                     "-".join(str(j) for j in js) if js else "",
                     float(term.coefficient), float(term.normalizer)))
    _write_csv(args.out,
               ["term", "k", "jump_path", "node_path", "coefficient", "normalizer"],
               rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lindbladsim",
        description="Desk-scale Lindblad simulation via a completely positive "
                    "series approximant with nested Gaussian quadrature.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="evolve a density matrix")
    sp.add_argument("--model", required=True)
    sp.add_argument("--rho0", default=None)
    sp.add_argument("--time", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--verify", action="store_true",
                    help="compare against the exact channel (n_qubits <= 3)")
    sp.add_argument("--timing", action="store_true")
    sp.set_defaults(func=_cmd_simulate)

    sp = sub.add_parser("td-simulate", help="evolve under a time-dependent model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--rho0", default=None)
    sp.add_argument("--time", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--out", default=None)
    sp.add_argument("--order", type=int, default=None)
    sp.add_argument("--grid", type=int, default=None)
    sp.add_argument("--segments", type=int, default=None)
    sp.add_argument("--timing", action="store_true")
    sp.set_defaults(func=_cmd_td_simulate)

    sp = sub.add_parser("analyze-error", help="sweep truncation orders, emit CSV")
    sp.add_argument("--model", action="append", default=None)
    sp.add_argument("--random-models", type=int, default=0)
    sp.add_argument("--n-qubits", type=int, default=1)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--time", type=float, default=0.3)
    sp.add_argument("--max-order", type=int, default=4)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--out", default=None)
    sp.add_argument("--timing", action="store_true")
    sp.set_defaults(func=_cmd_analyze_error)

    sp = sub.add_parser("quadrature", help="moment identity table")
    sp.add_argument("--max-q", type=int, default=8)
    sp.add_argument("--times", type=float, nargs="+", default=[0.1, 1.0, 7.0])
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_quadrature)

    sp = sub.add_parser("primitives-verify", help="JSON pass/fail matrix")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_primitives_verify)

    sp = sub.add_parser("kraus-dump", help="per-term coefficient table")
    sp.add_argument("--model", required=True)
    sp.add_argument("--time", type=float, required=True)
    sp.add_argument("--eps", type=float, required=True)
    sp.add_argument("--out", default=None)
    sp.set_defaults(func=_cmd_kraus_dump)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InfeasiblePrecisionError, ResourceLimitError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 3
    except (ModelError, ArgumentError, PauliParseError, ContractError,
            OSError, ValueError) as ex:
        print(f"error: {ex}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
