"""Command-line interface: construct, analyze, oned, sweep, verify.

Exit codes: 0 success, 2 validation error, 3 convergence failure,
4 acceptance failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import runs
from .io import dumps, write_json
from .oned import NonRotatingError
from .solver import ConvergenceError, ValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CONVERGENCE = 3
EXIT_ACCEPTANCE = 4


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--potential", help="potential kind (sine_gordon, zero, cosine_series)")
    p.add_argument("--coefficients", type=float, nargs="+", help="cosine-series coefficients")
    p.add_argument("--d", type=int)
    p.add_argument("--R", type=float)
    p.add_argument("--radii", type=float, nargs="+", help="continuation radii (increasing)")
    p.add_argument("--nr", type=int)
    p.add_argument("--ntheta", type=int, help="angular nodes on the full disk (multiple of 4d)")
    p.add_argument("--stencil", choices=("tuned", "standard"))
    p.add_argument("--tol", type=float, help="residual tolerance")
    p.add_argument("--linear-solver", choices=("direct", "cg"))
    p.add_argument("--seed", type=int)
    p.add_argument("--perturb", type=float, help="relative random perturbation of the initial guess")
    p.add_argument("--allow-uneven", action="store_true",
                   help="experimental: skip the evenness check on the potential")
    p.add_argument("--out")


def config_from_args(args) -> runs.RunConfig:
    data = {}
    if args.config:
        data = json.loads(Path(args.config).read_text())
    if args.potential:
        data["potential"] = {"kind": args.potential}
    if args.coefficients is not None:
        data["potential"] = {"kind": "cosine_series", "coefficients": args.coefficients}
    for key in ("d", "R", "radii", "nr", "ntheta", "stencil", "seed", "perturb", "out"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    solver = dict(data.get("solver", {}))
    if args.tol is not None:
        solver["newton_tol"] = args.tol
    if args.linear_solver is not None:
        solver["linear_solver"] = args.linear_solver
    if args.allow_uneven:
        solver["allow_uneven"] = True
    data["solver"] = solver
    if "d" in data and "ntheta" not in data:
        data["ntheta"] = 256 * data["d"]
    cfg = runs.RunConfig.from_json(data)
    return cfg.validate()


def cmd_construct(args) -> int:
    cfg = config_from_args(args)
    run = runs.construct(cfg, cfg.out or "run")
    print(dumps({"out": cfg.out, **{k: v for k, v in run.report.items() if not isinstance(v, dict)}}), end="")
    return EXIT_OK


def cmd_analyze(args) -> int:
    if args.which == "lemmas":
        result = runs.analyze_lemmas(args.run, args.radii, svg=args.svg)
    elif args.which == "modes":
        result = runs.analyze_modes(args.run, args.jmax, svg=args.svg)
    else:
        result = runs.analyze_growth(args.run, svg=args.svg)
    print(dumps(result), end="")
    return EXIT_OK


def cmd_oned(args) -> int:
    pot = {"kind": args.potential}
    if args.coefficients:
        pot = {"kind": "cosine_series", "coefficients": args.coefficients}
    report = runs.run_oned(pot, args.E, args.kappa, args.out, args.samples)
    print(dumps(report), end="")
    return EXIT_OK


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    values = [_parse_value(v) for v in args.values]
    summary = runs.sweep(cfg, args.param, values, args.out or "sweep", jobs=args.jobs)
    print(dumps(summary), end="")
    return EXIT_OK if all(s.get("converged") for s in summary) else EXIT_CONVERGENCE


def cmd_verify(args) -> int:
    from .acceptance import run_suite

    only = set(args.only) if args.only else None
    verdict = run_suite(args.suite, only=only, echo=lambda line: print(line, flush=True))
    out = Path(args.out or f"verdict_{args.suite}.json")
    write_json(out, verdict)
    status = "PASS" if verdict["passed"] else "FAIL"
    print(f"{status}: {sum(c['passed'] for c in verdict['criteria'])}/{len(verdict['criteria'])} checks passed "
          f"in {verdict['runtime_seconds']:.1f} s; verdict written to {out}")
    return EXIT_OK if verdict["passed"] else EXIT_ACCEPTANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polygrowth", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="solve the sector problem and write a run directory")
    _add_run_options(p)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("analyze", help="diagnostics on an existing run directory")
    p.add_argument("which", choices=("lemmas", "modes", "growth"))
    p.add_argument("--run", required=True)
    p.add_argument("--jmax", type=int)
    p.add_argument("--radii", type=float, nargs="+", help="radii for the comparison checks")
    p.add_argument("--svg", action="store_true", help="also emit SVG plots")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("oned", help="rotating one-dimensional solution")
    p.add_argument("--potential", default="sine_gordon")
    p.add_argument("--coefficients", type=float, nargs="+")
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=10_000, help="samples per period")
    p.add_argument("--out", default="oned")
    p.set_defaults(func=cmd_oned)

    p = sub.add_parser("sweep", help="construct one run per value of a config parameter")
    _add_run_options(p)
    p.add_argument("--param", required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("suite", choices=("fast", "full"), nargs="?", default="fast")
    p.add_argument("--only", type=int, nargs="+", help="criterion numbers to run")
    p.add_argument("--out", help="verdict JSON path")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (ValidationError, NonRotatingError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
