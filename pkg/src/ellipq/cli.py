"""Command line driver: ``ellipq run | explain | rmat | bethe``.

Reports are JSON lines; complex numbers are written as [re, im] pairs.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

from . import bethe, rmatrix
from .checks import CHECKS, SuiteConfig, explain, from_complex, to_complex
from .elliptic import EllipticParams, ThetaEngine
from .errors import ConfigError, EllipqError, UnknownCheck

THREADS_ENV = "ELLIPQ_THREADS"


def thread_count() -> int:
    val = os.environ.get(THREADS_ENV)
    if val:
        n = int(val)
        if n < 1:
            raise ConfigError(f"{THREADS_ENV} must be positive")
        return n
    return os.cpu_count() or 1


def load_config(path: str | None) -> SuiteConfig:
    if path is None:
        return SuiteConfig()
    with open(path, encoding="utf-8") as fh:
        return SuiteConfig.from_dict(json.load(fh))


def run_check(sc: SuiteConfig, name: str) -> dict:
    check = CHECKS[name]
    tol = sc.tolerance(name)
    start = time.perf_counter()
    report = {"check": name, "params": {"seed": sc.seed, "block": sc.block}}
    try:
        residual, extra = check.run(sc)
        report["params"].update(extra)
    except ConfigError:
        raise
    except (EllipqError, ArithmeticError, ValueError) as exc:
        residual = math.inf
        report["error"] = f"{type(exc).__name__}: {exc}"
    report["residual"] = float(residual) if math.isfinite(residual) else None
    report["tolerance"] = tol
    if check.diagnostic:
        report["diagnostic"] = True
        report["pass"] = True
    else:
        report["pass"] = bool(math.isfinite(residual) and residual <= tol)
    report["runtime_ms"] = int(round(1000 * (time.perf_counter() - start)))
    return report


def run_suite(sc: SuiteConfig, out=None) -> int:
    """Run the configured checks; returns the exit code (0 iff every gated check passes)."""
    for name in sc.suites:
        if name not in CHECKS:
            raise UnknownCheck(name)
    if "completeness" in sc.suites:
        bethe.CompletenessTask(sc.N, sc.alpha)
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        reports = list(pool.map(lambda n: run_check(sc, n), sc.suites))
    close = False
    if out is None:
        if sc.output:
            out = open(sc.output, "a", encoding="utf-8")
            close = True
        else:
            out = sys.stdout
    try:
        for rep in reports:
            out.write(json.dumps(rep) + "\n")
    finally:
        if close:
            out.close()
    return 0 if all(r["pass"] for r in reports) else 1


def block_json(blk: rmatrix.WeightBlockMatrix) -> dict:
    return {
        "m": blk.m,
        "index": [list(c) for c in blk.index],
        "entries": [[from_complex(x) for x in row] for row in blk.entries],
        "cond": blk.cond,
    }


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellipq", description="Numerical checks for elliptic dynamical R-matrices.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    run = sub.add_parser("run", help="run a suite of checks")
    run.add_argument("--config")
    run.add_argument("--suite", nargs="*")
    run.add_argument("--seed", type=int)
    run.add_argument("--out")

    ex = sub.add_parser("explain", help="describe a check")
    ex.add_argument("check", nargs="?")

    rm = sub.add_parser("rmat", help="print one weight block of R as JSON")
    rm.add_argument("--lambda1", type=to_complex, required=True)
    rm.add_argument("--lambda2", type=to_complex, required=True)
    rm.add_argument("--zdiff", type=to_complex, required=True)
    rm.add_argument("--lam", type=to_complex, required=True)
    rm.add_argument("--block", type=int, required=True)
    rm.add_argument("--method", choices=["residue", "closed"], default="residue")
    rm.add_argument("--tau", type=to_complex, default=complex(0.1, 1.0))
    rm.add_argument("--eta", type=to_complex, default=complex(0.13, 0.02))

    be = sub.add_parser("bethe", help="Bethe ansatz tools")
    be.add_argument("action", choices=["solve", "verify", "complete"])
    be.add_argument("--config")
    be.add_argument("--seed", type=int)
    be.add_argument("--c", type=to_complex)
    be.add_argument("--start", type=to_complex, nargs="*")
    be.add_argument("--root", type=to_complex, help="single root; c is derived from it")
    be.add_argument("--N", type=int)
    be.add_argument("--alpha", type=float)
    return ap


def _solution_from_args(args, sc: SuiteConfig):
    cfg = sc.config()
    if args.root is not None:
        return cfg, [bethe.solution_from_root(cfg, args.root)]
    if args.c is None or not args.start:
        raise ConfigError("give --root, or --c with --start")
    return cfg, bethe.bethe_solve(cfg, args.c, [args.start])


def _sol_json(sol: bethe.BetheSolution) -> dict:
    return {"t": [from_complex(x) for x in sol.t], "c": from_complex(sol.c),
            "eps": [from_complex(x) for x in sol.eps], "residual": sol.residual,
            "multiplier": from_complex(sol.multiplier), "diagonal": sol.diagonal}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.cmd == "explain":
            names = [args.check] if args.check else list(CHECKS)
            print("\n".join(explain(n) for n in names))
            return 0
        if args.cmd == "rmat":
            eng = ThetaEngine(EllipticParams(args.tau, args.eta))
            blk = rmatrix.rblock(eng, args.lambda1, args.lambda2, args.zdiff, args.lam, args.block, args.method)
            print(json.dumps(block_json(blk)))
            return 0
        sc = load_config(args.config)
        if args.seed is not None:
            sc.seed = args.seed
        if args.cmd == "run":
            if args.suite is not None:
                sc.suites = list(args.suite)
            if args.out:
                sc.output = args.out
            return run_suite(sc)
        if args.N is not None:
            sc.N = args.N
        if args.alpha is not None:
            sc.alpha = args.alpha
        if args.action == "complete":
            rep = run_check(sc, "completeness")
            print(json.dumps(rep))
            return 0 if rep["pass"] else 1
        cfg, sols = _solution_from_args(args, sc)
        for sol in sols:
            line = _sol_json(sol)
            if args.action == "verify":
                v = bethe.bethe_verify(cfg, sol, sc.lambda_samples, sc.seed)
                line.update({"eigen_residual": v.eigen, "multiplier_residual": v.multiplier,
                             "pairing_residual": v.pairing})
            print(json.dumps(line))
        return 0 if sols else 1
    except UnknownCheck as exc:
        print(f"ellipq: unknown check {exc}", file=sys.stderr)
        return 2
    except (ConfigError, EllipqError) as exc:
        print(f"ellipq: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
