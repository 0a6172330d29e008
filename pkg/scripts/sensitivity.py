"""One-at-a-time sensitivity sweeps on the bundled 49-site network.

Writes ``sweep_<param>.csv`` for each requested parameter.  The value grids
scale each default by the same factors unless ``--values`` overrides them
for a single parameter.

    python3 scripts/sensitivity.py --params h,c_e --out-dir results/sweeps --jobs 2
"""
import argparse
import dataclasses
from pathlib import Path

from reliable_chain import GeneratorParams, SolverConfig, bundled_sites
from reliable_chain.sweep import SWEEP_PARAMS, SweepSpec, run_sweep, write_csv

FACTORS = (0.25, 0.5, 1.0, 2.0, 4.0)
Q_VALUES = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)


def grid(base: GeneratorParams, param: str) -> tuple[float, ...]:
    if param == "q":
        return Q_VALUES
    return tuple(getattr(base, param) * f for f in FACTORS)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--params", default=",".join(SWEEP_PARAMS))
    ap.add_argument("--values", help="comma separated values (only with a single parameter)")
    ap.add_argument("--gap-tol", type=float, default=0.01)
    ap.add_argument("--max-iters", type=int, default=3000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out-dir", default="results/sweeps")
    args = ap.parse_args()

    params = args.params.split(",")
    if args.values and len(params) != 1:
        ap.error("--values needs exactly one parameter")
    base = GeneratorParams(sites=bundled_sites())
    config = SolverConfig(max_iters=args.max_iters, gap_tol=args.gap_tol)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for param in params:
        values = tuple(float(v) for v in args.values.split(",")) if args.values else grid(base, param)
        spec = SweepSpec(param, values, dataclasses.replace(base), config)
        rows = run_sweep(spec, jobs=args.jobs)
        print(write_csv(spec, rows, out / f"sweep_{param}.csv"))
        for row in rows:
            if row["error"]:
                print(f"  {param}={row['value']}: {row['error']}")
            else:
                print(f"  {param}={row['value']:g}: C={row['C']:.6g} N={row['N']} S={row['S']} "
                      f"PE={100 * row['PE']:.2f}% gap={100 * row['gap']:.2f}%")


if __name__ == "__main__":
    main()
