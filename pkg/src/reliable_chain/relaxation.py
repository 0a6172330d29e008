"""Lagrangian relaxation of the installation-linking constraints.

Relaxing ``sum_l Y_ijl <= X_i`` (multipliers ``lam``) and ``Z_ij <= X_i``
(multipliers ``mu``) splits the problem into a location part, solved by the
sign of the reduced fixed costs, and one assignment/stock problem per
terminal over (regular chain k, expedited supplier i', base stock S).

Two exact methods are provided for the terminal problem:

* ``"enumerate"`` walks every (i', k) pair, lexicographically, and bisects
  over S.  Cost is ``O(|I|^(L+1) log S)`` per terminal; use on small inputs.
* ``"dp"`` fixes (S, i') and observes that for a given supplier *set* the
  best level order is by ascending per-unit cost ``a_i = d (r_i + (e_i' - r_i)
  P_i(S))`` because level weights are non-increasing.  A prefix DP over the
  sorted suppliers then picks the optimal set in ``O(|I| L)``, vectorised
  over all (S, i').
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .costs import Solution, level_weights
from .instance import Instance


@dataclass(frozen=True, eq=False)
class Multipliers:
    lam: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lam, dtype=float)
        mu = np.array(self.mu, dtype=float)
        if lam.shape != mu.shape:
            raise ValueError("lam and mu shapes differ")
        if np.any(lam < 0) or np.any(mu < 0):
            raise ValueError("multipliers must be nonnegative")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "mu", mu)

    @classmethod
    def zeros(cls, inst: Instance) -> "Multipliers":
        shape = (inst.n_suppliers, inst.n_terminals)
        return cls(np.zeros(shape), np.zeros(shape))


class AssignmentTuple(NamedTuple):
    chain: tuple[int, ...]
    expedited: int
    stock: int


@dataclass(frozen=True, eq=False)
class RelaxedSolution:
    solution: Solution      # X from the location part; Y, Z, S from the terminals
    delta: float
    gamma: float
    phi: np.ndarray
    chains: np.ndarray      # (J, L)
    expedited: np.ndarray   # (J,)

    @property
    def X(self):
        return self.solution.X

    @property
    def Y(self):
        return self.solution.Y

    @property
    def Z(self):
        return self.solution.Z

    @property
    def S(self):
        return self.solution.S


def solve_location_subproblem(inst: Instance, m: Multipliers) -> tuple[np.ndarray, float]:
    if m.lam.shape != (inst.n_suppliers, inst.n_terminals):
        raise ValueError(f"multiplier shape {m.lam.shape} does not match instance")
    reduced = inst.fixed_cost - (m.lam + m.mu).sum(axis=1)
    X = reduced <= 0
    return X, float(reduced[X].sum())


def bisect_stock(slope_oracle: Callable[[int], float], cost_oracle: Callable[[int], float],
                 s_max: int) -> tuple[int, float]:
    """Minimise a discretely convex ``C`` over ``{0, ..., s_max}``.

    ``slope_oracle(s)`` must return ``C(s) - C(s-1)`` for ``s >= 1``.  The
    smallest minimiser is returned together with its cost.
    """
    if s_max < 0:
        raise ValueError("s_max must be nonnegative")
    if s_max == 0:
        return 0, cost_oracle(0)
    lo, hi = 0, s_max
    g_lo, g_hi = slope_oracle(1), slope_oracle(s_max)
    while True:
        if g_lo >= 0 and g_hi >= 0:
            best = lo
            break
        if g_lo < 0 and g_hi < 0:
            best = hi
            break
        if hi - lo <= 1:
            c_lo, c_hi = cost_oracle(lo), cost_oracle(hi)
            return (lo, c_lo) if c_lo <= c_hi else (hi, c_hi)
        mid = (lo + hi) // 2
        g_mid = slope_oracle(max(mid, 1))
        if g_mid >= 0:
            hi, g_hi = mid, g_mid
        else:
            lo, g_lo = mid, g_mid
    return best, cost_oracle(best)


def _tuple_cost(inst, table, lam_j, mu_j, j, chain, ip, s, w, qL):
    d, h = inst.demand[j], inst.holding[j]
    r = inst.regular_cost[:, j]
    e = inst.expedited_cost[ip, j]
    A = 0.0
    B = 0.0
    for l, i in enumerate(chain):
        A += d * (e - r[i]) * w[l] * table[i, j, s]
        B += d * r[i] * w[l] + lam_j[i]
    B += d * e * qL + mu_j[ip]
    return A + h * s + B


def _chain_oracles(inst, table, lam_j, mu_j, j, chain, ip, w, qL):
    d, h = inst.demand[j], inst.holding[j]
    r = inst.regular_cost[:, j]
    e = inst.expedited_cost[ip, j]
    coef = [(i, d * (e - r[i]) * w[l]) for l, i in enumerate(chain)]

    def slope(s):
        return h + sum(c * (table[i, j, s] - table[i, j, s - 1]) for i, c in coef)

    def cost(s):
        return _tuple_cost(inst, table, lam_j, mu_j, j, chain, ip, s, w, qL)

    return slope, cost


def _terminal_enumerate(inst, table, lam_j, mu_j, j):
    w = level_weights(inst.q, inst.L)
    qL = inst.q ** inst.L
    smax = int(inst.max_stock[j])
    best, best_cost = None, np.inf
    for ip in range(inst.n_suppliers):
        for chain in itertools.permutations(range(inst.n_suppliers), inst.L):
            slope, cost = _chain_oracles(inst, table, lam_j, mu_j, j, chain, ip, w, qL)
            s, c = bisect_stock(slope, cost, smax)
            if c < best_cost:
                best, best_cost = AssignmentTuple(chain, ip, s), c
    return best, best_cost


def _best_chain(a, lam, w, L):
    """Optimal ordered chain for one (S, i'): sort by ``a`` then prefix DP."""
    order = np.argsort(a, kind="stable")
    n = len(order)
    INF = float("inf")
    dp = [[INF] * (L + 1) for _ in range(n + 1)]
    take = [[False] * (L + 1) for _ in range(n + 1)]
    dp[0][0] = 0.0
    for p in range(1, n + 1):
        i = order[p - 1]
        dp[p][0] = 0.0
        for c in range(1, L + 1):
            skip = dp[p - 1][c]
            use = dp[p - 1][c - 1] + (w[c - 1] * a[i] + lam[i])
            if use < skip:
                dp[p][c], take[p][c] = use, True
            else:
                dp[p][c] = skip
    chain, c = [], L
    for p in range(n, 0, -1):
        if c and take[p][c]:
            chain.append(int(order[p - 1]))
            c -= 1
    return tuple(reversed(chain))


def _terminal_dp(inst, table, lam_j, mu_j, j):
    I, L = inst.n_suppliers, inst.L
    w = level_weights(inst.q, L)
    qL = inst.q ** L
    smax = int(inst.max_stock[j])
    d, h = inst.demand[j], inst.holding[j]
    r = inst.regular_cost[:, j]
    e = inst.expedited_cost[:, j]
    P = table[:, j, : smax + 1].T                       # (S, i)
    # a[s, i', i]: expected per-unit cost when i serves and i' expedites
    a = d * (r[None, None, :] + (e[None, :, None] - r[None, None, :]) * P[:, None, :])
    order = np.argsort(a, axis=2, kind="stable")
    a_sorted = np.take_along_axis(a, order, axis=2)
    lam_sorted = lam_j[order]
    shape = a.shape[:2]
    dp = [np.zeros(shape)] + [np.full(shape, np.inf) for _ in range(L)]
    for p in range(I):
        ap, lp = a_sorted[:, :, p], lam_sorted[:, :, p]
        for c in range(min(p + 1, L), 0, -1):
            np.minimum(dp[c], dp[c - 1] + (w[c - 1] * ap + lp), out=dp[c])
    value = dp[L] + h * np.arange(smax + 1)[:, None] + (d * e * qL + mu_j)[None, :]
    per_ip = value.min(axis=0)
    ip = int(np.argmin(per_ip))
    s = int(np.argmin(value[:, ip]))
    chain = _best_chain(a[s, ip], lam_j, w, L)
    cost = _tuple_cost(inst, table, lam_j, mu_j, j, chain, ip, s, w, qL)
    return AssignmentTuple(chain, ip, s), cost


def solve_terminal_subproblem(inst: Instance, m: Multipliers, j: int, method: str = "dp",
                              table: np.ndarray | None = None) -> tuple[AssignmentTuple, float]:
    if inst.n_suppliers < inst.L:
        raise ValueError("no admissible chain: fewer suppliers than levels")
    if table is None:
        table = inst.stockout
    lam_j, mu_j = m.lam[:, j], m.mu[:, j]
    if method == "dp":
        return _terminal_dp(inst, table, lam_j, mu_j, j)
    if method == "enumerate":
        return _terminal_enumerate(inst, table, lam_j, mu_j, j)
    raise ValueError(f"unknown method {method!r}")


def solve_relaxed(inst: Instance, m: Multipliers, method: str = "dp", threads: int = 1,
                  table: np.ndarray | None = None) -> RelaxedSolution:
    X, gamma = solve_location_subproblem(inst, m)
    if table is None:
        table = inst.stockout

    def one(j):
        return solve_terminal_subproblem(inst, m, j, method=method, table=table)

    J = inst.n_terminals
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(J)))
    else:
        results = [one(j) for j in range(J)]
    chains = np.array([res[0].chain for res in results], dtype=np.int64).reshape(J, inst.L)
    expedited = np.array([res[0].expedited for res in results], dtype=np.int64)
    S = np.array([res[0].stock for res in results], dtype=np.int64)
    phi = np.array([res[1] for res in results])
    sol = Solution.from_assignments(inst.n_suppliers, chains, expedited, S, X=X)
    delta = gamma + float(phi.sum())
    return RelaxedSolution(sol, delta, gamma, phi, chains, expedited)
