"""Command-line entry point.

Subcommands: sweep, recover, rip, ratio, c0, plot. Every subcommand
accepts --config (a JSON file of ExperimentConfig fields) plus flag
overrides. Exit codes: 0 success, 1 runtime failure (with a one-line
JSON error record on stderr), 2 usage errors (argparse).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import harness, qlinalg, rip
from .errors import QcsError
from .solver import RecoveryProblem, SolverParams, solve


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split(",") if tok.strip())


def build_config(args) -> harness.ExperimentConfig:
    base: dict = {}
    if getattr(args, "config", None):
        with open(args.config) as fh:
            base = json.load(fh)
    if getattr(args, "n", None) is not None:
        base["n"] = args.n
    if getattr(args, "m", None) is not None:
        base["m_values"] = list(_parse_int_list(args.m))
    if getattr(args, "s", None) is not None:
        base["s_rule"] = args.s if args.s == "1..m/2" else list(_parse_int_list(args.s))
    if getattr(args, "trials", None) is not None:
        base["trials"] = args.trials
    if getattr(args, "seed", None) is not None:
        base["base_seed"] = args.seed
    if getattr(args, "eta", None) is not None:
        base["eta"] = args.eta
    if getattr(args, "mode", None) is not None:
        base["scalar_mode"] = args.mode
    if getattr(args, "out", None) is not None:
        base["out_dir"] = args.out
    if getattr(args, "full", False):
        base.setdefault("m_values", list(range(2, 65, 2)))
        base["trials"] = base.get("trials", 1000)
    return harness.ExperimentConfig.from_json_dict(base)


def _solver_params_from_args(args) -> SolverParams:
    kw = {}
    if args.rho is not None:
        kw["rho"] = args.rho
    if args.max_iters is not None:
        kw["max_iters"] = args.max_iters
    if args.tol_primal is not None:
        kw["tol_primal"] = args.tol_primal
    if args.tol_dual is not None:
        kw["tol_dual"] = args.tol_dual
    if args.no_polish:
        kw["polish"] = False
    if args.trace is not None:
        kw["trace_path"] = args.trace
    return SolverParams(**kw)


def cmd_sweep(args) -> int:
    config = build_config(args)
    diagram = harness.run_sweep(config, verbose=True)
    diagram.to_csv(os.path.join(config.out_dir, "grid.csv"))
    if args.plot:
        harness.emit_plot(diagram, os.path.join(config.out_dir, "heatmap.svg"))
    print(json.dumps({"out_dir": config.out_dir,
                      "cells": len(diagram.rates)}, sort_keys=True))
    return 0


def cmd_recover(args) -> int:
    Phi = qlinalg.load_json(args.phi)
    y = qlinalg.load_json(args.y)
    params = _solver_params_from_args(args)
    result = solve(RecoveryProblem(Phi, y, args.eta), params)
    record = {
        "status": result.status.value,
        "iterations": result.iterations,
        "objective": result.objective,
        "primal_residual": result.primal_residual,
        "dual_residual": result.dual_residual,
        "polished": result.polished,
    }
    if args.truth:
        x_true = qlinalg.load_json(args.truth)
        record["err_l1"] = qlinalg.lp_norm(result.x_hat - x_true, 1)
        record["err_l2"] = qlinalg.lp_norm(result.x_hat - x_true, 2)
    if args.out:
        qlinalg.save_json(result.x_hat, args.out)
        record["x_hat_path"] = args.out
    print(json.dumps(record, sort_keys=True))
    return 0


def cmd_rip(args) -> int:
    if args.s is None:
        raise ValueError("rip requires --s <support size>")
    order = int(args.s)
    Phi = qlinalg.load_json(args.phi)
    report = rip.exact_delta(Phi, order, budget=args.budget)
    payload = {
        "s": report.s,
        "delta": report.delta,
        "method": report.method.value,
        "supports_examined": report.supports_examined,
        "argmax_support": list(report.argmax_support.indices),
        "elapsed": report.elapsed,
    }
    if args.sampled:
        lb = rip.sampled_delta_lower_bound(Phi, order, args.sampled)
        payload["sampled_lower_bound"] = lb.delta
        payload["sampled_trials"] = lb.supports_examined
    print(json.dumps(payload, sort_keys=True))
    if args.certificate:
        s_rec = report.s // 2
        if s_rec < 1:
            print("certificate: need s >= 2 so that delta_s covers some 2s'-sparse order")
        elif report.delta < rip.SQRT2 - 1:
            consts = rip.error_constants(report.delta)
            print(f"certificate: delta_{report.s} = {report.delta:.6f} < sqrt(2)-1, so every "
                  f"{s_rec}-sparse recovery from data with noise bound eta satisfies")
            print(f"  ||x# - x||_2 <= (C0/sqrt({s_rec})) ||x - x_{s_rec}||_1 + C1 eta")
            print(f"  with C0 = {consts.C0:.6f}, C1 = {consts.C1:.6f}; "
                  "exact-data s-sparse recovery is exact.")
        else:
            print(f"certificate: delta_{report.s} = {report.delta:.6f} >= sqrt(2)-1 "
                  f"= {rip.SQRT2 - 1:.6f}; no recovery guarantee follows")
    return 0


def cmd_ratio(args) -> int:
    if args.m is None:
        raise ValueError("ratio requires --m <measurement count>")
    m = _parse_int_list(args.m)[0]
    result = harness.run_ratio_test(m, args.samples,
                                    base_seed=args.seed or 0,
                                    mode=args.mode or "quaternion")
    text = json.dumps(result, sort_keys=True)
    print(text)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    return 0


def cmd_c0(args) -> int:
    config = build_config(args)
    s_values = None
    if args.s is not None and args.s != "1..m/2":
        s_values = list(_parse_int_list(args.s))
    data = harness.run_c0_experiment(config, s_values=s_values, verbose=True)
    if args.plot:
        harness.emit_plot(data, os.path.join(config.out_dir, "c0_scatter.svg"))
    print(json.dumps({"out_dir": config.out_dir, "points": len(data.points),
                      "skipped": data.skipped}, sort_keys=True))
    return 0


def cmd_plot(args) -> int:
    if args.input.endswith(".jsonl"):
        points = []
        with open(args.input) as fh:
            for line in fh:
                if line.strip():
                    d = json.loads(line)
                    points.append((d["s"], d["c0_lower_bound"]))
        harness.emit_plot(points, args.out)
    else:
        with open(args.input) as fh:
            payload = json.load(fh)
        kind = payload.get("kind")
        if kind == "sweep_summary":
            harness.emit_plot(harness.PhaseDiagram.from_summary_dict(payload), args.out)
        elif kind == "c0_summary":
            points = [(int(s), v) for s, v in payload["max_per_s"].items()]
            harness.emit_plot(points, args.out)
        else:
            raise ValueError(f"cannot plot payload of kind {kind!r}")
    print(json.dumps({"out": args.out}, sort_keys=True))
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with experiment settings")
    common.add_argument("--n", type=int, help="signal length")
    common.add_argument("--m", type=str, help="comma-separated measurement counts")
    common.add_argument("--s", type=str,
                        help='sparsity rule: "1..m/2" or comma-separated values')
    common.add_argument("--trials", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--eta", type=float, default=None)
    common.add_argument("--mode", choices=["quaternion", "real"])
    common.add_argument("--out", type=str)

    parser = argparse.ArgumentParser(
        prog="qcs",
        description="Sparse quaternion signal recovery by l1 minimization")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", parents=[common],
                       help="phase-transition sweep over (m, s) cells")
    p.add_argument("--plot", action="store_true", help="emit heatmap.svg")
    p.add_argument("--full", action="store_true",
                   help="full-grid profile: m = 2..64, 1000 trials (long-running)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("recover", parents=[common],
                       help="solve one recovery problem from files")
    p.add_argument("--phi", required=True, help="measurement matrix JSON")
    p.add_argument("--y", required=True, help="measurement vector JSON")
    p.add_argument("--truth", help="ground-truth signal JSON for error reporting")
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--tol-primal", type=float, default=None)
    p.add_argument("--tol-dual", type=float, default=None)
    p.add_argument("--no-polish", action="store_true")
    p.add_argument("--trace", help="stream per-iteration diagnostics to this CSV")
    p.set_defaults(func=cmd_recover, eta=0.0)

    p = sub.add_parser("rip", parents=[common],
                       help="restricted isometry constant of a matrix file")
    p.add_argument("--phi", required=True)
    p.add_argument("--budget", type=int, default=rip.DEFAULT_BUDGET)
    p.add_argument("--sampled", type=int, default=0,
                   help="also report a sampled lower bound from this many trials")
    p.add_argument("--certificate", action="store_true",
                   help="print the recovery-guarantee constants when delta permits")
    p.set_defaults(func=cmd_rip)

    p = sub.add_parser("ratio", parents=[common],
                       help="measurement-ratio distribution test")
    p.add_argument("--samples", type=int, default=20000)
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("c0", parents=[common],
                       help="dense-signal lower-bound scatter experiment")
    p.add_argument("--plot", action="store_true", help="emit c0_scatter.svg")
    p.set_defaults(func=cmd_c0)

    p = sub.add_parser("plot", parents=[common],
                       help="render a summary or scatter file as SVG")
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QcsError, ValueError, OSError, json.JSONDecodeError) as exc:
        record = {"error": type(exc).__name__, "message": str(exc)}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
