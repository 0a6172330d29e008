"""Turning relaxed solutions into feasible designs (upper bounds)."""
from __future__ import annotations

import numpy as np

from .costs import Solution, evaluate, level_weights, terminal_cost
from .instance import Instance
from .relaxation import RelaxedSolution, bisect_stock


def naive_repair(relaxed: RelaxedSolution) -> Solution:
    """Keep Y, Z, S and install exactly the suppliers they reference."""
    sol = relaxed.solution
    X = sol.Y.any(axis=(1, 2)) | sol.Z.any(axis=1)
    return Solution(X, sol.Y.copy(), sol.Z.copy(), sol.S.copy())


def refined_assignment(inst: Instance, installed: np.ndarray, j: int,
                       table: np.ndarray | None = None) -> tuple[tuple[int, ...], int, int, float]:
    """Best (chain, expedited, stock, cost) for terminal ``j`` using only ``installed``.

    The expedited supplier is the cheapest-``e`` installed one and the chain is
    the ``L`` cheapest-``r`` installed suppliers in ascending order; ties go to
    the smaller supplier id.  Only the stock level needs a search.
    """
    if table is None:
        table = inst.stockout
    installed = np.asarray(installed, dtype=np.int64)
    r = inst.regular_cost[installed, j]
    e = inst.expedited_cost[installed, j]
    chain = tuple(int(i) for i in installed[np.argsort(r, kind="stable")[: inst.L]])
    ip = int(installed[np.argmin(e)])
    w = level_weights(inst.q, inst.L)
    d, h = inst.demand[j], inst.holding[j]
    e_ip = inst.expedited_cost[ip, j]
    coef = [(i, d * (e_ip - inst.regular_cost[i, j]) * w[l]) for l, i in enumerate(chain)]

    def slope(s):
        return h + sum(c * (table[i, j, s] - table[i, j, s - 1]) for i, c in coef)

    def cost(s):
        return terminal_cost(inst, j, chain, ip, s, table)

    s, c = bisect_stock(slope, cost, int(inst.max_stock[j]))
    return chain, ip, s, c


def refined_feasible(inst: Instance, installed, table: np.ndarray | None = None) -> Solution:
    """Fix the installed set and reassign every terminal optimally within it.

    Installed suppliers that end up serving nobody are closed.
    """
    installed = np.unique(np.asarray(list(installed), dtype=np.int64))
    if len(installed) < inst.L:
        raise ValueError(f"installed set has {len(installed)} suppliers, need at least L={inst.L}")
    chains, exped, stock = [], [], []
    for j in range(inst.n_terminals):
        chain, ip, s, _ = refined_assignment(inst, installed, j, table)
        chains.append(chain)
        exped.append(ip)
        stock.append(s)
    return Solution.from_assignments(inst.n_suppliers, chains, exped, stock)


def make_feasible(inst: Instance, relaxed: RelaxedSolution,
                  table: np.ndarray | None = None) -> tuple[Solution, float]:
    """Cheapest of the naive repair and the refined reassignments.

    Refined candidates use the relaxed X together with every supplier
    referenced by Y or Z, and (when it has at least L members) the relaxed X
    alone.  Ties keep the earlier candidate, naive first.
    """
    naive = naive_repair(relaxed)
    x_only = np.nonzero(relaxed.X)[0]
    union = np.nonzero(relaxed.X | naive.X)[0]
    candidates = [naive, refined_feasible(inst, union, table)]
    if len(x_only) >= inst.L and len(x_only) < len(union):
        candidates.append(refined_feasible(inst, x_only, table))
    best, best_cost = None, np.inf
    for cand in candidates:
        c = evaluate(inst, cand, table).C
        if c < best_cost:
            best, best_cost = cand, c
    return best, best_cost
