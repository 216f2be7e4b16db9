"""Command-line front end.

Exit codes: 0 success, 1 invalid input, 2 a check exceeded its tolerance.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .convex_fn import ConvexFn
from .exceptions import ConvexValError
from .harness import run_suite, undergraph_lambda_sweep
from .measures import RadonMeasure
from .partitions import PolytopalPartition, complete, inductive_certificate
from .sublevel import profile
from .valuation import (IntegralValuation, eval_beta, eval_layercake, eval_sublevel, oracle_from_dict,
                        recover_densities)

ROUTES = {"sublevel": eval_sublevel, "beta": eval_beta, "layercake": eval_layercake}


class InputError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.9f}"


def _load_json(path: str) -> dict:
    p = Path(path)
    if not p.is_file():
        raise InputError(f"no such file: {path}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _check_out(path: str | None) -> None:
    if path is not None and not Path(path).resolve().parent.is_dir():
        raise InputError(f"output directory does not exist: {path}")


def _parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise InputError(f"--t expects a:b:n, got {text!r}") from exc


def cmd_eval(args) -> int:
    u = ConvexFn.from_dict(_load_json(args.fn))
    v = IntegralValuation(args.k, RadonMeasure.from_dict(_load_json(args.measure)))
    routes = [args.route]
    if args.all_routes:
        routes = ["sublevel", "beta"] + (["layercake"] if args.k == u.dim else [])
    values = {r: ROUTES[r](v, u) for r in routes}
    for r in routes:
        print(f"{r} {_fmt(values[r])}")
    if len(routes) > 1:
        ref = values["sublevel"]
        for r in routes[1:]:
            print(f"delta {r}-sublevel {values[r] - ref:.3e}")
    return 0


def cmd_profile(args) -> int:
    _check_out(args.out)
    u = ConvexFn.from_dict(_load_json(args.fn))
    prof = profile(u, args.k)
    if args.t:
        ts = _parse_grid(args.t)
    else:
        top = float(u.breakpoints[-1]) if len(u.breakpoints) else prof.m_value
        ts = np.linspace(prof.m_value, top + 1.0, 65)
    text = prof.to_csv(ts)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_densities(args) -> int:
    oracle = oracle_from_dict(_load_json(args.oracle))
    ts = _parse_grid(args.t)
    header = "t," + ",".join(f"f_{k}" for k in range(oracle.dim + 1))
    print(header)
    for t in ts:
        d = recover_densities(oracle, float(t), args.r)
        print(_fmt(t) + "," + ",".join(_fmt(x) for x in d.values))
    return 0


def cmd_partition(args) -> int:
    _check_out(args.out)
    _check_out(args.certificate)
    p = PolytopalPartition.from_dict(_load_json(args.inp))
    p.validate()
    pc = complete(p)
    Path(args.out).write_text(json.dumps(pc.to_dict(), indent=2))
    print(f"cells {len(p)} -> {len(pc)}")
    if args.certificate:
        cert = inductive_certificate(pc)
        Path(args.certificate).write_text(json.dumps(cert.to_dict(), indent=2))
        ok = cert.validate(pc)
        print(f"certificate length {len(cert)} valid {str(ok).lower()}")
        if not ok:
            return 2
    return 0


def cmd_verify(args) -> int:
    _check_out(args.report)
    rep = run_suite(args.suite, args.trials, args.seed, args.tol)
    subs = rep.suites or [rep]
    for s in subs:
        print(f"{s.check} {'pass' if s.passed else 'FAIL'} max_residual {s.max_residual:.3e}")
    if args.report:
        Path(args.report).write_text(rep.to_json() + "\n")
    return 0 if rep.passed else 2


def cmd_undergraph(args) -> int:
    _check_out(args.out)
    try:
        lams = [float(x) for x in args.lam.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"--lambda expects comma-separated numbers, got {args.lam!r}") from exc
    study = undergraph_lambda_sweep(lams, args.t)
    for lam, v in zip(study.lambdas, study.values):
        print(f"{_fmt(lam)} {_fmt(v)}")
    if args.out:
        Path(args.out).write_text(study.to_csv())
    return 0 if study.max_deviation <= 1e-9 else 2


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="convexval", description="Integral valuations on convex functions.")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("eval", help="evaluate mu(u) = int V_k(cl{u<t}) dnu(t)")
    p.add_argument("--fn", required=True, help="function JSON")
    p.add_argument("--measure", required=True, help="measure JSON")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--route", choices=sorted(ROUTES), default="sublevel")
    p.add_argument("--all-routes", action="store_true", help="run every applicable route and print deltas")
    p.set_defaults(run=cmd_eval)

    p = sub.add_parser("profile", help="tabulate t -> V_k(cl{u<t})")
    p.add_argument("--fn", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", help="grid a:b:n (default spans the breakpoints)")
    p.add_argument("--out", help="CSV path (stdout if omitted)")
    p.set_defaults(run=cmd_profile)

    p = sub.add_parser("densities", help="recover f_k(t) from a valuation oracle")
    p.add_argument("--oracle", required=True, help="oracle JSON")
    p.add_argument("--t", required=True, help="grid a:b:n")
    p.add_argument("--r", type=float, default=1.0, help="box side for the triangular solve")
    p.set_defaults(run=cmd_densities)

    p = sub.add_parser("partition", help="partition operations")
    psub = p.add_subparsers(dest="action", required=True)
    c = psub.add_parser("complete", help="complete a polytopal partition")
    c.add_argument("--in", dest="inp", required=True)
    c.add_argument("--out", required=True)
    c.add_argument("--certificate", help="also write an inductive certificate")
    c.set_defaults(run=cmd_partition)

    p = sub.add_parser("verify", help="run check suites")
    p.add_argument("--suite", choices=["all", "routes", "lattice", "partitions", "undergraph"], default="all")
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=None, help="override the suite tolerances")
    p.add_argument("--report", help="report JSON path")
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("undergraph", help="undergraph-length of |x|/lambda")
    p.add_argument("--lambda", dest="lam", required=True, help="comma-separated lambda values")
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--out", help="CSV path")
    p.set_defaults(run=cmd_undergraph)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; remap to the invalid-input code
        return 0 if exc.code == 0 else 1
    try:
        return args.run(args)
    except (InputError, ConvexValError, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
