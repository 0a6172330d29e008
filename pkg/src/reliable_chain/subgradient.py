"""Subgradient optimisation of the Lagrangian dual with primal repair."""
from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .costs import CostBreakdown, Solution, evaluate
from .feasibility import make_feasible
from .instance import Instance
from .relaxation import Multipliers, RelaxedSolution, solve_relaxed

log = logging.getLogger(__name__)


class ZeroSubgradient(Exception):
    """No relaxed linking constraint is violated; the step is undefined."""


@dataclass(frozen=True)
class SolverConfig:
    tau0: float = 1.0
    tau_min: float = 1e-3
    stall_window: int = 5
    theta: float = 1.005
    max_iters: int = 60
    gap_tol: float = 1e-3
    method: str = "dp"
    threads: int = 1
    verbose: bool = False

    def __post_init__(self):
        if not 0 < self.tau0 <= 2:
            raise ValueError("tau0 must lie in (0, 2]")
        if self.theta <= 1:
            raise ValueError("theta must exceed 1")
        if self.gap_tol <= 0:
            raise ValueError("gap_tol must be positive")
        if self.tau_min <= 0 or self.stall_window < 1 or self.max_iters < 1:
            raise ValueError("tau_min, stall_window and max_iters must be positive")


@dataclass
class IterationRecord:
    k: int
    delta: float
    lower: float
    upper: float
    tau: float
    step: float | None
    elapsed: float


@dataclass
class SolveResult:
    solution: Solution
    costs: CostBreakdown
    lower: float
    upper: float
    gap: float
    exit_reason: str
    log: list[IterationRecord] = field(default_factory=list)
    wall_time: float = 0.0
    multipliers: Multipliers | None = None

    @property
    def iterations(self) -> int:
        return len(self.log)

    def log_dicts(self) -> list[dict]:
        return [asdict(rec) for rec in self.log]


def subgradient(relaxed: RelaxedSolution) -> tuple[np.ndarray, np.ndarray]:
    X = relaxed.X.astype(float)[:, None]
    return relaxed.Y.sum(axis=2) - X, relaxed.Z.astype(float) - X


def step_size(tau: float, incumbent: float, delta: float, relaxed: RelaxedSolution,
              multipliers: Multipliers | None = None) -> float:
    """``tau (C - delta) / D``.

    ``D`` sums the positive subgradient parts.  When ``multipliers`` are
    given, negative parts whose multiplier is still positive are added too:
    those are the components the projected update will actually move, and
    leaving them out makes the step far too long once suppliers are
    over-installed.  Raises :class:`ZeroSubgradient` when ``D`` is zero.
    """
    g_lam, g_mu = subgradient(relaxed)
    D = float(np.maximum(g_lam, 0).sum() + np.maximum(g_mu, 0).sum())
    if multipliers is not None:
        D += float(-g_lam[(g_lam < 0) & (multipliers.lam > 0)].sum()
                   - g_mu[(g_mu < 0) & (multipliers.mu > 0)].sum())
    if D == 0:
        raise ZeroSubgradient()
    return tau * (incumbent - delta) / D


def update_multipliers(m: Multipliers, t: float, relaxed: RelaxedSolution) -> Multipliers:
    if t < 0:
        raise ValueError("negative step")
    g_lam, g_mu = subgradient(relaxed)
    return Multipliers(np.maximum(m.lam + t * g_lam, 0.0), np.maximum(m.mu + t * g_mu, 0.0))


def relative_gap(upper: float, lower: float) -> float:
    if upper == 0:
        return 0.0
    return max(0.0, (upper - lower) / upper)


def solve(inst: Instance, config: SolverConfig = SolverConfig()) -> SolveResult:
    start = time.perf_counter()
    table = inst.stockout
    m = Multipliers.zeros(inst)
    tau = config.tau0
    best_delta = -np.inf
    upper, best = np.inf, None
    stall = 0
    records: list[IterationRecord] = []
    reason = "max_iters"
    for k in range(1, config.max_iters + 1):
        relaxed = solve_relaxed(inst, m, method=config.method, threads=config.threads, table=table)
        if relaxed.delta > best_delta:
            best_delta, stall = relaxed.delta, 0
        else:
            stall += 1
            if stall >= config.stall_window:
                tau /= config.theta
                stall = 0

        cand, cost = make_feasible(inst, relaxed, table)
        if cost < upper:
            upper, best = cost, cand
        lower = best_delta
        gap = relative_gap(upper, lower)

        step = None
        if gap <= config.gap_tol:
            reason = "gap"
        elif tau < config.tau_min:
            reason = "tau"
        else:
            try:
                step = step_size(tau, upper, relaxed.delta, relaxed, m)
            except ZeroSubgradient:
                reason = "zero_subgradient"
        records.append(IterationRecord(k, relaxed.delta, lower, upper, tau, step,
                                       time.perf_counter() - start))
        if config.verbose:
            log.info("iter %3d  delta %.6g  upper %.6g  gap %.4f%%  tau %.4g",
                     k, relaxed.delta, upper, 100 * gap, tau)
        if step is None:
            break
        m = update_multipliers(m, step, relaxed)

    lower = records[-1].lower
    return SolveResult(best, evaluate(inst, best, table), lower, upper,
                       relative_gap(upper, lower), reason, records,
                       time.perf_counter() - start, m)
