"""Command line entry point: ``reliable-chain {generate,solve,sweep,layout,simulate}``.

Exit codes: 0 success, 1 validation error, 2 solver error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .costs import stockout_probability
from .instance import (GeneratorParams, InstanceError, bundled_sites, check_valid,
                       generate_synthetic, load_instance, load_sites, save_instance)
from .oracle import simulate_base_stock
from .report import build_layout, build_report
from .subgradient import SolverConfig, solve
from .sweep import SWEEP_PARAMS, SweepSpec, run_sweep, write_csv

EXIT_OK, EXIT_VALIDATION, EXIT_SOLVER, EXIT_IO = 0, 1, 2, 3


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _add_generator_flags(p):
    g = p.add_argument_group("generator")
    g.add_argument("--sites", help="site CSV (name,lat,lon,city_pop,state_pop); default: bundled 49 sites")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--q", type=float, default=0.1)
    g.add_argument("--h", type=float, default=100.0)
    g.add_argument("--c-r", type=float, default=0.01)
    g.add_argument("--c-e", type=float, default=1.0)
    g.add_argument("--c-f", type=float, default=0.02)
    g.add_argument("--c-d", type=float, default=1e-5)
    g.add_argument("--c-l", type=float, default=1e-4)
    g.add_argument("--levels", "--L", dest="L", type=int, default=3)
    g.add_argument("--max-stock", type=int, default=None,
                   help="uniform inventory cap; default: per-terminal Erlang cap")


def _add_solver_flags(p):
    g = p.add_argument_group("solver")
    g.add_argument("--gap-tol", type=float, default=1e-3)
    g.add_argument("--max-iters", type=int, default=60)
    g.add_argument("--tau0", type=float, default=1.0)
    g.add_argument("--tau-min", type=float, default=1e-3)
    g.add_argument("--stall-window", type=int, default=5)
    g.add_argument("--theta", type=float, default=1.005)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--method", choices=("dp", "enumerate"), default="dp")
    g.add_argument("--verbose", action="store_true")


def _params(args) -> GeneratorParams:
    try:
        sites = load_sites(args.sites) if args.sites else bundled_sites()
    except OSError as exc:
        raise CliError(f"cannot read sites: {exc}", EXIT_IO) from exc
    except (InstanceError, ValueError, KeyError) as exc:
        raise CliError(f"bad site CSV: {exc}", EXIT_VALIDATION) from exc
    return GeneratorParams(h=args.h, c_r=args.c_r, c_e=args.c_e, c_f=args.c_f, c_d=args.c_d,
                           c_l=args.c_l, L=args.L, q=args.q, seed=args.seed, sites=sites,
                           max_stock=args.max_stock)


def _config(args) -> SolverConfig:
    try:
        return SolverConfig(tau0=args.tau0, tau_min=args.tau_min, stall_window=args.stall_window,
                            theta=args.theta, max_iters=args.max_iters, gap_tol=args.gap_tol,
                            method=args.method, threads=args.threads, verbose=args.verbose)
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc


def _load(path):
    try:
        return load_instance(path)
    except OSError as exc:
        raise CliError(f"cannot read instance: {exc}", EXIT_IO) from exc
    except InstanceError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc


def _write_json(obj, path):
    text = json.dumps(obj, indent=1) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}", EXIT_IO) from exc


def cmd_generate(args) -> int:
    try:
        inst = check_valid(generate_synthetic(_params(args)))
    except InstanceError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    try:
        save_instance(inst, args.out)
    except OSError as exc:
        raise CliError(f"cannot write {args.out}: {exc}", EXIT_IO) from exc
    print(f"suppliers={inst.n_suppliers} terminals={inst.n_terminals} L={inst.L} q={inst.q}")
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load(args.instance)
    config = _config(args)
    try:
        result = solve(inst, config)
    except Exception as exc:  # noqa: BLE001
        raise CliError(f"solver failed: {exc}", EXIT_SOLVER) from exc
    _write_json(build_report(inst, result, config, timing=not args.no_timing), args.out)
    c = result.costs
    print(f"C={c.C:.6g} lower={result.lower:.6g} gap={100 * result.gap:.3f}% "
          f"N={int(result.solution.X.sum())} S={int(result.solution.S.sum())} "
          f"PE={100 * c.PE:.2f}% exit={result.exit_reason}", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        values = tuple(float(v) for v in args.values.split(","))
        spec = SweepSpec(args.param, values, _params(args), _config(args))
    except ValueError as exc:
        raise CliError(str(exc), EXIT_VALIDATION) from exc
    rows = run_sweep(spec, jobs=args.jobs)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        path = write_csv(spec, rows, out_dir / f"sweep_{args.param}.csv")
    except OSError as exc:
        raise CliError(f"cannot write sweep: {exc}", EXIT_IO) from exc
    print(path)
    return EXIT_OK


def cmd_layout(args) -> int:
    inst = _load(args.instance)
    try:
        report = json.loads(Path(args.report).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read report: {exc}", EXIT_IO) from exc
    except json.JSONDecodeError as exc:
        raise CliError(f"report parse error: {exc}", EXIT_VALIDATION) from exc
    try:
        layout = build_layout(inst, report)
    except (InstanceError, KeyError) as exc:
        raise CliError(f"mismatched files: {exc}", EXIT_VALIDATION) from exc
    _write_json(layout, args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.d <= 0 or args.t < 0 or args.S < 0 or args.events < 1:
        raise CliError("need d > 0, t >= 0, S >= 0, events >= 1", EXIT_VALIDATION)
    stats = simulate_base_stock(args.d, args.t, args.S, args.events, args.seed, args.lead_time)
    analytic = stockout_probability(args.d * args.t, args.S)
    diff = stats.expedite_fraction - analytic
    z = diff / stats.standard_error if stats.standard_error > 0 else (0.0 if diff == 0 else float("inf"))
    _write_json({"d": args.d, "t": args.t, "S": args.S, "lead_time": args.lead_time,
                 "events": stats.events, "expedited_events": stats.expedited_events,
                 "empirical": stats.expedite_fraction, "standard_error": stats.standard_error,
                 "analytic": analytic, "z": z}, None)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="reliable-chain", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build an instance from a site list")
    _add_generator_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="run the Lagrangian solver on an instance file")
    p.add_argument("--instance", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--no-timing", action="store_true",
                   help="omit wall-clock fields so repeated runs are byte-identical")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="vary one generator scalar and solve each point")
    p.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p.add_argument("--values", required=True, help="comma separated values")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--jobs", type=int, default=1, help="solve sweep points in parallel processes")
    _add_generator_flags(p)
    _add_solver_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("layout", help="export nodes/edges of a solved design")
    p.add_argument("--instance", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("simulate", help="Monte Carlo check of the stock-out formula")
    p.add_argument("--d", type=float, default=1.0)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--S", type=int, default=1)
    p.add_argument("--events", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lead-time", choices=("deterministic", "exponential"), default="deterministic")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "verbose", False):
        logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
