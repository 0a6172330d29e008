"""Independent ground truth for small problems.

Nothing here reuses the solver's cost code: the brute-force solver evaluates
the objective term by term with a factorial-sum stock-out probability, and
the simulator measures stock-outs by replaying Poisson demand against a
base-stock policy.
"""
from __future__ import annotations

import heapq
import itertools
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .costs import Solution
from .instance import Instance

MAX_SUPPLIERS, MAX_TERMINALS, MAX_LEVELS, MAX_STOCK = 6, 5, 3, 15


class OracleTooLarge(ValueError):
    pass


def erlang_direct(rho: float, s: int) -> float:
    """Stock-out probability from the truncated Poisson sums (small ``s`` only)."""
    terms = [rho**u / math.factorial(u) for u in range(s + 1)]
    return terms[-1] / math.fsum(terms)


def _terminal_options(inst: Instance, j: int):
    """Best stock and cost for every (expedited, chain) pair at terminal ``j``."""
    I, L, q = inst.n_suppliers, inst.L, inst.q
    d, h = float(inst.demand[j]), float(inst.holding[j])
    r = inst.regular_cost[:, j]
    e = inst.expedited_cost[:, j]
    rho = inst.lead_time[:, j] * d
    P = [[erlang_direct(float(rho[i]), s) for s in range(int(inst.max_stock[j]) + 1)] for i in range(I)]
    out = []
    for ip in range(I):
        for chain in itertools.permutations(range(I), L):
            best = None
            for s in range(int(inst.max_stock[j]) + 1):
                c = h * s + d * q**L * e[ip]
                for l, i in enumerate(chain, start=1):
                    c += d * (1 - q) * q ** (l - 1) * (r[i] + (e[ip] - r[i]) * P[i][s])
                if best is None or c < best[0]:
                    best = (c, s)
            out.append((best[0], ip, chain, best[1], frozenset(chain) | {ip}))
    return out


def brute_force_solve(inst: Instance) -> tuple[Solution, float]:
    """Exact optimum by enumerating every installed set."""
    I, J = inst.n_suppliers, inst.n_terminals
    if I > MAX_SUPPLIERS or J > MAX_TERMINALS or inst.L > MAX_LEVELS or inst.max_stock.max() > MAX_STOCK:
        raise OracleTooLarge(
            f"brute force limited to |I|<={MAX_SUPPLIERS}, |J|<={MAX_TERMINALS}, "
            f"L<={MAX_LEVELS}, max_stock<={MAX_STOCK}"
        )
    options = [_terminal_options(inst, j) for j in range(J)]
    best_total, best_pick = math.inf, None
    for size in range(inst.L, I + 1):
        for subset in itertools.combinations(range(I), size):
            allowed = frozenset(subset)
            total = sum(float(inst.fixed_cost[i]) for i in subset)
            pick = []
            for opts in options:
                # options are in (i', chain) lexicographic order; keep the first minimum
                cand = min((o for o in opts if o[4] <= allowed), key=lambda o: o[0])
                total += cand[0]
                pick.append(cand)
            if total < best_total:
                best_total, best_pick = total, pick
    chains = [o[2] for o in best_pick]
    exped = [o[1] for o in best_pick]
    stock = [o[3] for o in best_pick]
    sol = Solution.from_assignments(I, chains, exped, stock)
    # closing suppliers nobody uses can only help
    optimum = sum(float(inst.fixed_cost[i]) for i in np.nonzero(sol.X)[0]) + sum(o[0] for o in best_pick)
    return sol, optimum


@dataclass(frozen=True)
class SimStats:
    events: int
    expedited_events: int
    expedite_fraction: float
    standard_error: float


def simulate_base_stock(d: float, t: float, S: int, horizon_events: int = 100_000, seed: int = 0,
                        lead_time: str = "deterministic", warmup: float = 0.05,
                        batches: int = 50) -> SimStats:
    """Replay Poisson(d) demand against base stock ``S`` with regular lead time mean ``t``.

    A demand that meets an empty shelf is expedited (served instantly, no
    replenishment order); otherwise one unit is taken and reordered.  The
    first ``warmup`` share of events is discarded.  The standard error is the
    batch-means estimate, floored by the binomial one with the fraction kept
    at least one event away from 0 and 1 so rare-event runs with no hits do
    not report a zero error.
    """
    if d <= 0 or t < 0 or S < 0:
        raise ValueError("need d > 0, t >= 0, S >= 0")
    if lead_time not in ("deterministic", "exponential"):
        raise ValueError(f"unknown lead time distribution {lead_time!r}")
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(1.0 / d, size=horizon_events)
    arrivals = np.cumsum(gaps).tolist()
    if lead_time == "exponential":
        leads = rng.exponential(t, size=horizon_events).tolist() if t > 0 else [0.0] * horizon_events
    skip = int(warmup * horizon_events)
    hit = np.zeros(horizon_events - skip, dtype=bool)

    if lead_time == "deterministic":
        pending = deque()
        for k, now in enumerate(arrivals):
            while pending and pending[0] <= now:
                pending.popleft()
            if len(pending) < S:
                pending.append(now + t)
            elif k >= skip:
                hit[k - skip] = True
    else:
        heap: list[float] = []
        for k, now in enumerate(arrivals):
            while heap and heap[0] <= now:
                heapq.heappop(heap)
            if len(heap) < S:
                heapq.heappush(heap, now + leads[k])
            elif k >= skip:
                hit[k - skip] = True

    n = hit.size
    frac = float(hit.mean())
    nb = min(batches, n)
    means = np.array([chunk.mean() for chunk in np.array_split(hit, nb)])
    se = float(means.std(ddof=1) / math.sqrt(nb)) if nb > 1 else 0.0
    p = min(max(frac, 1.0 / n), 1.0 - 1.0 / n) if n > 1 else 0.5
    se = max(se, math.sqrt(p * (1.0 - p) / n))
    return SimStats(n, int(hit.sum()), frac, se)
