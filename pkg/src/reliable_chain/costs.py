"""Stock-out probabilities, cost components and feasibility checks.

The stock-out probability is the Erlang loss (truncated Poisson) formula,
evaluated with the recursion ``P(u) = rho P(u-1) / (u + rho P(u-1))`` so that
large loads never overflow a factorial.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .instance import Instance


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    index: tuple = ()

    def __str__(self) -> str:
        where = f" at {self.index}" if self.index else ""
        return f"{self.message}{where}"


class InfeasibleSolution(ValueError):
    def __init__(self, violation: Violation):
        super().__init__(str(violation))
        self.violation = violation


def stockout_probability(rho: float, s: int) -> float:
    """Probability that a demand finds no stock on hand under base stock ``s``.

    ``rho`` is the load ``d * t`` (demand rate times mean regular lead time).
    """
    if rho < 0:
        raise ValueError(f"negative load rho={rho}")
    if s < 0:
        raise ValueError(f"negative base stock s={s}")
    p = 1.0
    for u in range(1, s + 1):
        a = rho * p
        p = a / (u + a)
    return p


def stockout_table(rho: np.ndarray, s_max: int) -> np.ndarray:
    """Vectorised recursion; returns an array of shape ``rho.shape + (s_max + 1,)``.

    Performs exactly the floating point operations of
    :func:`stockout_probability`, so every entry is bit-identical to the scalar
    call.
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0):
        raise ValueError("negative load in stock-out table")
    out = np.empty(rho.shape + (s_max + 1,))
    p = np.ones(rho.shape)
    out[..., 0] = p
    for u in range(1, s_max + 1):
        a = rho * p
        p = a / (u + a)
        out[..., u] = p
    return out


def level_weight(q: float, l: int) -> float:
    """Probability that the level-``l`` supplier (1-based) is the one serving."""
    if l == 1:
        return 1.0 - q
    return (1.0 - q) * q ** (l - 1)


def level_weights(q: float, L: int) -> np.ndarray:
    return np.array([level_weight(q, l) for l in range(1, L + 1)])


@dataclass(frozen=True, eq=False)
class Solution:
    """A design: X (I,), Y (I, J, L), Z (I, J) booleans and base stocks S (J,)."""

    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "X", np.asarray(self.X, dtype=bool))
        object.__setattr__(self, "Y", np.asarray(self.Y, dtype=bool))
        object.__setattr__(self, "Z", np.asarray(self.Z, dtype=bool))
        object.__setattr__(self, "S", np.asarray(self.S, dtype=np.int64))

    @classmethod
    def from_assignments(cls, n_suppliers, chains, expedited, S, X=None) -> "Solution":
        """Build from per-terminal chains ``(J, L)`` and expedited ids ``(J,)``.

        With ``X=None`` exactly the suppliers in use are installed.
        """
        chains = np.asarray(chains, dtype=np.int64)
        expedited = np.asarray(expedited, dtype=np.int64)
        J, L = chains.shape
        Y = np.zeros((n_suppliers, J, L), dtype=bool)
        Z = np.zeros((n_suppliers, J), dtype=bool)
        jj = np.arange(J)
        for l in range(L):
            Y[chains[:, l], jj, l] = True
        Z[expedited, jj] = True
        if X is None:
            X = Y.any(axis=(1, 2)) | Z.any(axis=1)
        return cls(X, Y, Z, S)

    def chains(self) -> np.ndarray:
        """Regular supplier per (terminal, level); -1 where no supplier is set."""
        has = self.Y.any(axis=0)
        return np.where(has, self.Y.argmax(axis=0), -1)

    def expedited(self) -> np.ndarray:
        return np.where(self.Z.any(axis=0), self.Z.argmax(axis=0), -1)

    def same_as(self, other: "Solution") -> bool:
        return (
            np.array_equal(self.X, other.X)
            and np.array_equal(self.Y, other.Y)
            and np.array_equal(self.Z, other.Z)
            and np.array_equal(self.S, other.S)
        )


@dataclass(frozen=True)
class CostBreakdown:
    CH: float
    CR: float
    CM: float
    CE: float
    CF: float
    C: float
    PE: float

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("CH", "CR", "CM", "CE", "CF", "C", "PE")}


def check_feasible(instance: "Instance", sol: Solution) -> list[Violation]:
    I, J, L = instance.n_suppliers, instance.n_terminals, instance.L
    if sol.X.shape != (I,) or sol.Y.shape != (I, J, L) or sol.Z.shape != (I, J) or sol.S.shape != (J,):
        raise ValueError(
            f"solution shapes X{sol.X.shape} Y{sol.Y.shape} Z{sol.Z.shape} S{sol.S.shape} "
            f"do not match instance (I={I}, J={J}, L={L})"
        )
    out = []
    X = sol.X.astype(int)
    ysum = sol.Y.sum(axis=2)
    for i, j in zip(*np.nonzero(ysum > X[:, None])):
        out.append(Violation("regular_link", "regular assignment exceeds installation", (int(i), int(j))))
    for i, j in zip(*np.nonzero(sol.Z.astype(int) > X[:, None])):
        out.append(Violation("expedited_link", "expedited assignment to uninstalled supplier", (int(i), int(j))))
    for j, l in zip(*np.nonzero(sol.Y.sum(axis=0) != 1)):
        out.append(Violation("one_per_level", "terminal needs exactly one regular supplier per level",
                             (int(j), int(l) + 1)))
    for j in np.nonzero(sol.Z.sum(axis=0) != 1)[0]:
        out.append(Violation("one_expedited", "terminal needs exactly one expedited supplier", (int(j),)))
    for j in np.nonzero((sol.S < 0) | (sol.S > instance.max_stock))[0]:
        out.append(Violation("stock_range", "base stock outside [0, max_stock]", (int(j),)))
    return out


def evaluate(instance: "Instance", sol: Solution, table: np.ndarray | None = None) -> CostBreakdown:
    """Cost components of a feasible solution.

    The marginal expedited coefficient is ``e[i', j] - r[i, j]`` with ``i``
    the active regular supplier.  ``table`` overrides the instance's cached
    stock-out table.
    """
    bad = check_feasible(instance, sol)
    if bad:
        raise InfeasibleSolution(bad[0])
    if table is None:
        table = instance.stockout
    d, r, e = instance.demand, instance.regular_cost, instance.expedited_cost
    J = instance.n_terminals
    w = level_weights(instance.q, instance.L)
    qL = instance.q ** instance.L
    # P[i, j] = P_ij(S_j)
    P = table[:, np.arange(J), sol.S]
    e_exp = (instance.expedited_cost * sol.Z).sum(axis=0)
    Yw = (sol.Y * w).sum(axis=2)  # level weight of supplier i at terminal j

    CH = float(np.sum(instance.holding * sol.S))
    CR = float(np.sum(d * r * Yw))
    CM = float(np.sum(d * (e_exp - r) * Yw * P))
    CE = float(np.sum(d * e * qL * sol.Z))
    CF = float(np.sum(instance.fixed_cost * sol.X))
    PE = float(np.sum(d * Yw * P) / np.sum(d))
    total = CH + CR + CM + CE + CF
    return CostBreakdown(CH, CR, CM, CE, CF, total, PE)


def terminal_cost(instance: "Instance", j: int, chain, expedited: int, s: int,
                  table: np.ndarray | None = None) -> float:
    """Operating cost of terminal ``j`` (everything except fixed costs)."""
    if table is None:
        table = instance.stockout
    d = instance.demand[j]
    r = instance.regular_cost[:, j]
    e = instance.expedited_cost[expedited, j]
    total = instance.holding[j] * s
    for l, i in enumerate(chain, start=1):
        total += d * level_weight(instance.q, l) * (r[i] + (e - r[i]) * table[i, j, s])
    return total + d * e * instance.q ** instance.L


def erlang_cap(rho: float, tol: float = 1e-6, cap: int = 200) -> int:
    """Smallest ``S`` with stock-out probability below ``tol``, at most ``cap``."""
    p = 1.0
    for s in range(1, cap + 1):
        a = rho * p
        p = a / (s + a)
        if p < tol:
            return s
    return cap


__all__ = [
    "CostBreakdown", "InfeasibleSolution", "Solution", "Violation", "check_feasible",
    "erlang_cap", "evaluate", "level_weight", "level_weights", "stockout_probability",
    "stockout_table", "terminal_cost",
]
