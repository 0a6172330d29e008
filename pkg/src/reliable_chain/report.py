"""JSON report and layout builders shared by the CLI and scripts."""
from __future__ import annotations

from dataclasses import asdict

import numpy as np

from .costs import Solution, check_feasible, level_weights
from .instance import Instance, InstanceError
from .subgradient import SolveResult, SolverConfig


def solution_to_dict(sol: Solution) -> dict:
    return {
        "X": [int(x) for x in sol.X],
        "Y": [[int(i) for i in row] for row in sol.chains()],
        "Z": [int(i) for i in sol.expedited()],
        "S": [int(s) for s in sol.S],
    }


def solution_from_dict(inst: Instance, d: dict) -> Solution:
    try:
        sol = Solution.from_assignments(inst.n_suppliers, d["Y"], d["Z"], d["S"], X=d["X"])
    except (KeyError, IndexError, ValueError) as exc:
        raise InstanceError(f"report solution does not match instance: {exc!r}") from exc
    if len(d["Y"]) != inst.n_terminals or any(len(row) != inst.L for row in d["Y"]):
        raise InstanceError("report solution does not match instance dimensions")
    return sol


def build_report(inst: Instance, result: SolveResult, config: SolverConfig, timing: bool = True) -> dict:
    log = result.log_dicts()
    if not timing:
        for rec in log:
            rec["elapsed"] = None
    cfg = asdict(config)
    cfg.pop("verbose", None)
    cfg.pop("threads", None)
    return {
        "instance": {"n_suppliers": inst.n_suppliers, "n_terminals": inst.n_terminals,
                     "L": inst.L, "q": inst.q},
        "config": cfg,
        "solution": solution_to_dict(result.solution),
        "costs": result.costs.to_dict(),
        "bounds": {"lower": result.lower, "upper": result.upper, "gap": result.gap},
        "N": int(result.solution.X.sum()),
        "S": int(result.solution.S.sum()),
        "T": result.wall_time if timing else None,
        "exit_reason": result.exit_reason,
        "iterations": result.iterations,
        "log": log,
    }


def build_layout(inst: Instance, report: dict) -> dict:
    """Nodes and edges needed to redraw a network layout."""
    sol = solution_from_dict(inst, report["solution"])
    bad = check_feasible(inst, sol)
    if bad:
        raise InstanceError(f"report solution infeasible for instance: {bad[0]}")
    w = level_weights(inst.q, inst.L)
    qL = inst.q ** inst.L
    table = inst.stockout
    sites = inst.sites

    def site(k):
        if sites is None or k >= len(sites):
            return {}
        return {"name": sites[k].name, "lat": sites[k].lat, "lon": sites[k].lon}

    nodes = [{"id": i, "role": "supplier", "installed": bool(sol.X[i]), **site(i)}
             for i in range(inst.n_suppliers)]
    nodes += [{"id": j, "role": "terminal", "S": int(sol.S[j]), **site(j)}
              for j in range(inst.n_terminals)]
    edges = []
    chains, exped = sol.chains(), sol.expedited()
    for j in range(inst.n_terminals):
        s = int(sol.S[j])
        total_exp = qL
        for l in range(inst.L):
            i = int(chains[j, l])
            p = float(table[i, j, s])
            total_exp += w[l] * p
            edges.append({"terminal": j, "supplier": i, "level": l + 1,
                          "weight": float(w[l]), "expedite_share": p})
        edges.append({"terminal": j, "supplier": int(exped[j]), "level": "expedited",
                      "weight": float(total_exp), "expedite_share": 1.0})
    return {"q": inst.q, "L": inst.L, "nodes": nodes, "edges": edges}


def installed_count(report: dict) -> int:
    return int(np.sum(report["solution"]["X"]))
