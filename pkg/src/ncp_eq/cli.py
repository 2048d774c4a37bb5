"""``ncp-eq`` command-line interface."""

from __future__ import annotations

import argparse
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import audit
from .config import ConfigError, RunConfig, load_config, make_solver_config, to_dict
from .linalg import norm_inf
from .market import DomainError, inverse_demand, kkt_residual
from .reform import Phi, PsiSystem
from .solver import InsufficientData, Method, SolveResult, Status, estimate_order, reference_solution, solve

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CODES = {
    Status.CONVERGED: EXIT_OK,
    Status.MAX_ITERATIONS: 3,
    Status.SINGULAR_FAILURE: 4,
    Status.DOMAIN_FAILURE: 5,
}
EXIT_CHECK_FAILED = 6
EXIT_INSUFFICIENT_DATA = 7


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _vec(v) -> str:
    return "[" + ", ".join(f"{x:.6f}" for x in v) + "]"


def write_trace(result: SolveResult, out) -> None:
    """Comma-separated ``k, z_1..z_n, n_1`` rows, one per iterate."""
    n = result.solution.shape[0]
    out.write(",".join(["k"] + [f"z_{i + 1}" for i in range(n)] + ["n_1"]) + "\n")
    rows = [(r.k, r.z_k, r.residual_norm) for r in result.trace]
    rows.append((len(result.trace), result.solution, result.final_residual))
    for k, z, n1 in rows:
        out.write(",".join([str(k)] + [_fmt(x) for x in z] + [_fmt(n1)]) + "\n")


def trace_text(result: SolveResult) -> str:
    buf = io.StringIO()
    write_trace(result, buf)
    return buf.getvalue()


def _market_summary(cfg: RunConfig, z) -> dict:
    out = {"total_supply": float(np.sum(z))}
    try:
        out["price"] = inverse_demand(cfg.market.demand, out["total_supply"])
        out["kkt_residual"] = kkt_residual(cfg.market, z)
    except DomainError:
        out["price"] = out["kkt_residual"] = None
    return out


def _result_summary(result: SolveResult) -> dict:
    return {
        "status": result.status.value,
        "iterations": result.iterations,
        "solution": result.solution.tolist(),
        "final_residual": result.final_residual,
        "message": result.message,
    }


def _emit_json(path: str | None, doc: dict) -> None:
    if not path:
        return
    text = json.dumps(doc, indent=2)
    if path == "-":
        print(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def cmd_solve(cfg: RunConfig) -> int:
    sys_ = PsiSystem(cfg.market, cfg.phi)
    result = solve(sys_, cfg.z0, cfg.solver)
    summary = _market_summary(cfg, result.solution)

    print(f"method          : {cfg.solver.method.value} newton, phi = {cfg.phi.value}, cost = {cfg.market.cost_variant.value}")
    print(f"status          : {result.status.value}")
    if result.message:
        print(f"message         : {result.message}")
    print(f"iterations      : {result.iterations}")
    print(f"solution        : {_vec(result.solution)}")
    print(f"total supply    : {summary['total_supply']:.6f}")
    if summary["price"] is not None:
        print(f"market price    : {summary['price']:.6f}")
        print(f"kkt residual    : {summary['kkt_residual']:.3e}")
    print(f"final n_1       : {result.final_residual:.3e}  (tol {cfg.solver.tol:g})")

    if cfg.trace_path:
        with open(cfg.trace_path, "w", encoding="utf-8", newline="") as fh:
            write_trace(result, fh)
    _emit_json(cfg.json_path, {"config": to_dict(cfg), "result": _result_summary(result), **summary})
    return EXIT_CODES[result.status]


def cmd_compare(cfg: RunConfig) -> int:
    sys_ = PsiSystem(cfg.market, cfg.phi)
    methods = (Method.MODIFIED_NEWTON, Method.CLASSICAL_NEWTON)
    with ThreadPoolExecutor(max_workers=len(methods)) as pool:
        futures = {m: pool.submit(solve, sys_, cfg.z0, replace(cfg.solver, method=m)) for m in methods}
        results = {m: f.result() for m, f in futures.items()}

    print(f"{'method':<10} {'status':<17} {'iters':>5} {'final n_1':>11}  solution")
    for m, r in results.items():
        print(f"{m.value:<10} {r.status.value:<17} {r.iterations:>5} {r.final_residual:>11.3e}  {_vec(r.solution)}")
    a, b = (results[m] for m in methods)
    agreement = None
    if a.converged and b.converged:
        agreement = norm_inf(a.solution - b.solution)
        print(f"agreement (max abs difference): {agreement:.3e}")
    else:
        print("agreement: n/a (at least one method did not converge)")
    _emit_json(
        cfg.json_path,
        {"config": to_dict(cfg), "results": {m.value: _result_summary(r) for m, r in results.items()}, "agreement": agreement},
    )
    return EXIT_OK


def cmd_order(cfg: RunConfig) -> int:
    sys_ = PsiSystem(cfg.market, cfg.phi)
    result = solve(sys_, cfg.z0, cfg.solver)
    ref = reference_solution(sys_, cfg.z0, cfg.solver)
    print(f"method    : {cfg.solver.method.value} newton ({result.status.value} after {result.iterations} passes)")
    print(f"reference : {_vec(ref)}")
    try:
        est = estimate_order(result.trace, ref)
    except InsufficientData as exc:
        print(f"cannot estimate order: {exc}")
        print("the trace is too short; start farther from the solution or tighten the tolerance")
        return EXIT_INSUFFICIENT_DATA
    print(f"{'k':>3} {'||z_k - z*||':>12} {'rho_k':>8}")
    for k, e in enumerate(est.error_norms):
        rho = est.per_step_orders[k - 1] if 1 <= k <= len(est.per_step_orders) else float("nan")
        rho_s = f"{rho:8.3f}" if np.isfinite(rho) else f"{'-':>8}"
        print(f"{k:>3} {e:12.3e} {rho_s}")
    print(f"last defined order: {est.last_order:.3f}")
    print(f"max defined order : {est.max_order:.3f}")
    _emit_json(
        cfg.json_path,
        {
            "config": to_dict(cfg),
            "result": _result_summary(result),
            "reference": ref.tolist(),
            "error_norms": est.error_norms,
            "orders": [r if np.isfinite(r) else None for r in est.per_step_orders],
        },
    )
    return EXIT_OK


def cmd_check(cfg: RunConfig, corrupt: bool = False, seed: int = 0) -> int:
    results = audit.run_checks(cfg.market, cfg.phi, np.random.default_rng(seed), corrupt=corrupt)
    width = max(len(r.name) for r in results)
    failed = []
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        extra = f"  ({r.detail})" if r.detail else ""
        print(f"{flag}  {r.name:<{width}}  value {r.value:.3e}  tol {r.tol:.1e}{extra}")
        if not r.passed:
            failed.append(r.name)
    if failed:
        print("failed checks: " + "; ".join(failed), file=sys.stderr)
    _emit_json(cfg.json_path, {"checks": [r.__dict__ | {"passed": bool(r.passed)} for r in results]})
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncp-eq", description="Solve complementarity problems via the psi reformulation")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="JSON run configuration (bundled fixtures resolve by name)")
        p.add_argument("--json", metavar="PATH", help="write a machine-readable summary ('-' for stdout)")
        p.add_argument("--tol", type=float, help="override solver.tol")
        p.add_argument("--max-iter", type=int, help="override solver.max_iter")
        p.add_argument("--method", choices=[m.value for m in Method], help="override solver.method")
        p.add_argument("--phi", choices=[p.value for p in Phi], help="override phi")
        return p

    p = common(sub.add_parser("solve", help="run the configured solver"))
    p.add_argument("--trace", metavar="PATH", help="write the per-iteration trace as CSV")
    common(sub.add_parser("compare", help="modified vs classical Newton side by side"))
    common(sub.add_parser("order", help="estimate the computational order of convergence"))
    p = common(sub.add_parser("check", help="finite-difference and equivalence audits"))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--corrupt-jacobian", action="store_true", help=argparse.SUPPRESS)
    return parser


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    solver_kw = {}
    if args.tol is not None:
        solver_kw["tol"] = args.tol
    if args.max_iter is not None:
        solver_kw["max_iter"] = args.max_iter
    if args.method is not None:
        solver_kw["method"] = Method(args.method)
    if solver_kw:
        base = {k: getattr(cfg.solver, k) for k in ("tol", "max_iter", "reg_t", "reg_lambda", "reg_mu", "reg_eta", "method")}
        cfg = replace(cfg, solver=make_solver_config(**(base | solver_kw)))
    if args.phi is not None:
        cfg = replace(cfg, phi=Phi(args.phi))
    if getattr(args, "trace", None):
        cfg = replace(cfg, trace_path=args.trace)
    if args.json:
        cfg = replace(cfg, json_path=args.json)
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_overrides(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "solve":
        return cmd_solve(cfg)
    if args.command == "compare":
        return cmd_compare(cfg)
    if args.command == "order":
        return cmd_order(cfg)
    return cmd_check(cfg, corrupt=args.corrupt_jacobian, seed=args.seed)


if __name__ == "__main__":
    sys.exit(main())
