"""One-parameter sensitivity sweeps over generated instances."""
from __future__ import annotations

import csv
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .instance import GeneratorParams, check_valid, generate_synthetic
from .subgradient import SolverConfig, solve

SWEEP_PARAMS = ("q", "h", "c_r", "c_e", "c_f", "c_d", "c_l")
COLUMNS = ("param", "value", "CH", "CR", "CM", "CE", "CF", "C", "PE", "S", "N",
           "lower", "upper", "gap", "iterations", "error")


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[float, ...]
    base: GeneratorParams
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValueError(f"cannot sweep {self.param!r}; choose from {SWEEP_PARAMS}")
        if not self.values:
            raise ValueError("sweep needs at least one value")


def run_point(spec: SweepSpec, value: float) -> dict:
    row = {"param": spec.param, "value": value}
    try:
        params = dataclasses.replace(spec.base, **{spec.param: value})
        inst = check_valid(generate_synthetic(params))
        res = solve(inst, spec.config)
        row.update(res.costs.to_dict())
        row.update(S=int(res.solution.S.sum()), N=int(res.solution.X.sum()), lower=res.lower,
                   upper=res.upper, gap=res.gap, iterations=res.iterations, error="")
    except Exception as exc:  # noqa: BLE001 - failures are reported per row
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def run_sweep(spec: SweepSpec, jobs: int = 1) -> list[dict]:
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(run_point, [spec] * len(spec.values), spec.values))
    return [run_point(spec, v) for v in spec.values]


def write_csv(spec: SweepSpec, rows: list[dict], path) -> Path:
    path = Path(path)
    note = ("unit draws shared; expedited costs recomputed for every c_e value" if spec.param == "c_e"
            else "expedited-cost draws shared across values")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# sweep {spec.param}; seed={spec.base.seed}; {note}\n")
        writer = csv.DictWriter(fh, fieldnames=COLUMNS, lineterminator="\n", restval="")
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    return list(csv.DictReader(lines))
