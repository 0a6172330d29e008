"""Brute-force references used across the test modules."""
import itertools

import mpmath
import numpy as np

from reliable_chain.oracle import erlang_direct


def lagrangian_terminal_brute(inst, lam, mu, j, suppliers=None):
    """min over (chain, expedited, S) of the relaxed terminal cost, by direct sums."""
    suppliers = range(inst.n_suppliers) if suppliers is None else suppliers
    d, h, q, L = inst.demand[j], inst.holding[j], inst.q, inst.L
    r, e = inst.regular_cost[:, j], inst.expedited_cost[:, j]
    best = np.inf
    for ip in suppliers:
        for chain in itertools.permutations(suppliers, L):
            for s in range(int(inst.max_stock[j]) + 1):
                c = h * s + d * e[ip] * q**L + mu[ip, j]
                for l, i in enumerate(chain, start=1):
                    P = erlang_direct(float(d * inst.lead_time[i, j]), s)
                    c += d * (1 - q) * q ** (l - 1) * (r[i] + (e[ip] - r[i]) * P) + lam[i, j]
                best = min(best, c)
    return best


def random_multipliers(rng, inst, scale=None):
    scale = float(inst.fixed_cost.mean()) / inst.n_terminals if scale is None else scale
    shape = (inst.n_suppliers, inst.n_terminals)
    lam = rng.uniform(0, scale, shape) * (rng.random(shape) < 0.7)
    mu = rng.uniform(0, scale, shape) * (rng.random(shape) < 0.7)
    return lam, mu


def erlang_mp(rho, s):
    """Stock-out probability from the factorial sums at 50 digits."""
    with mpmath.workdps(50):
        rho = mpmath.mpf(rho)
        terms = [rho**u / mpmath.factorial(u) for u in range(s + 1)]
        return terms[-1] / mpmath.fsum(terms)
