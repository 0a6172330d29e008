"""Problem instances: container, validation, JSON I/O and the site-based generator."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from importlib import resources
from pathlib import Path

import numpy as np

from .costs import Violation, erlang_cap, stockout_table
from .rng import SplitMix64

EARTH_RADIUS_KM = 6371.0088


class InstanceError(ValueError):
    """Raised when an instance file cannot be read or fails validation."""

    def __init__(self, message: str, violations: list[Violation] | None = None):
        super().__init__(message)
        self.violations = violations or []


@dataclass(frozen=True)
class Site:
    name: str
    lat: float
    lon: float
    city_pop: float = 0.0
    state_pop: float = 0.0


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Instance:
    """Suppliers ``i`` and terminals ``j`` with their cost and lead-time data.

    Matrices are indexed ``[supplier, terminal]``.  Arrays are read-only after
    construction.  ``sites`` optionally carries names/coordinates (one per
    supplier when suppliers and terminals are co-located) for layout export.
    """

    fixed_cost: np.ndarray
    demand: np.ndarray
    holding: np.ndarray
    max_stock: np.ndarray
    regular_cost: np.ndarray
    expedited_cost: np.ndarray
    lead_time: np.ndarray
    q: float
    L: int
    sites: tuple[Site, ...] | None = field(default=None)

    def __post_init__(self):
        for name in ("fixed_cost", "demand", "holding", "regular_cost", "expedited_cost", "lead_time"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        object.__setattr__(self, "max_stock", _frozen(self.max_stock, np.int64))
        object.__setattr__(self, "q", float(self.q))
        object.__setattr__(self, "L", int(self.L))
        I, J = self.fixed_cost.shape[0], self.demand.shape[0]
        if self.fixed_cost.ndim != 1 or self.demand.ndim != 1:
            raise InstanceError("fixed_cost and demand must be 1-D")
        for name in ("holding", "max_stock"):
            if getattr(self, name).shape != (J,):
                raise InstanceError(f"{name} has shape {getattr(self, name).shape}, expected ({J},)")
        for name in ("regular_cost", "expedited_cost", "lead_time"):
            if getattr(self, name).shape != (I, J):
                raise InstanceError(f"{name} has shape {getattr(self, name).shape}, expected ({I}, {J})")

    @property
    def n_suppliers(self) -> int:
        return self.fixed_cost.shape[0]

    @property
    def n_terminals(self) -> int:
        return self.demand.shape[0]

    @cached_property
    def load(self) -> np.ndarray:
        """``rho[i, j] = d_j * t_ij``."""
        return self.lead_time * self.demand[None, :]

    @cached_property
    def stockout(self) -> np.ndarray:
        """Table ``P[i, j, s]`` for ``s <= max(max_stock)``, computed once."""
        tab = stockout_table(self.load, int(self.max_stock.max(initial=0)))
        tab.setflags(write=False)
        return tab

    def to_dict(self) -> dict:
        d = {
            "suppliers": [{"fixed_cost": float(f)} for f in self.fixed_cost],
            "terminals": [
                {"demand_rate": float(dj), "holding_cost": float(hj), "max_stock": int(sj)}
                for dj, hj, sj in zip(self.demand, self.holding, self.max_stock)
            ],
            "regular_cost": self.regular_cost.tolist(),
            "expedited_cost": self.expedited_cost.tolist(),
            "lead_time": self.lead_time.tolist(),
            "q": self.q,
            "L": self.L,
        }
        if self.sites is not None:
            d["sites"] = [{"name": s.name, "lat": s.lat, "lon": s.lon} for s in self.sites]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Instance":
        try:
            sites = d.get("sites")
            return cls(
                fixed_cost=[s["fixed_cost"] for s in d["suppliers"]],
                demand=[t["demand_rate"] for t in d["terminals"]],
                holding=[t["holding_cost"] for t in d["terminals"]],
                max_stock=[t["max_stock"] for t in d["terminals"]],
                regular_cost=d["regular_cost"],
                expedited_cost=d["expedited_cost"],
                lead_time=d["lead_time"],
                q=d["q"],
                L=d["L"],
                sites=None if sites is None else tuple(Site(s["name"], s["lat"], s["lon"]) for s in sites),
            )
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, InstanceError):
                raise
            raise InstanceError(f"parse error: {exc!r}") from exc

    def with_max_stock(self, max_stock) -> "Instance":
        d = self.__dict__.copy()
        for k in ("load", "stockout"):
            d.pop(k, None)
        d["max_stock"] = np.broadcast_to(np.asarray(max_stock, dtype=np.int64), (self.n_terminals,))
        return Instance(**d)


def validate(inst: Instance) -> list[Violation]:
    """All invariant violations of ``inst``; empty when the instance is valid."""
    out: list[Violation] = []
    I, J = inst.n_suppliers, inst.n_terminals
    if not 0.0 <= inst.q < 1.0 or math.isnan(inst.q):
        out.append(Violation("q_range", "disruption_prob out of range", ()))
    if inst.L < 1:
        out.append(Violation("levels", "levels must be a positive integer", ()))
    if I < inst.L:
        out.append(Violation("too_few_suppliers", "fewer suppliers than levels", (I, inst.L)))
    for j in np.nonzero(~(inst.demand > 0))[0]:
        out.append(Violation("demand", "demand_rate must be positive", (int(j),)))
    for j in np.nonzero(~(inst.holding >= 0))[0]:
        out.append(Violation("holding", "holding_cost must be nonnegative", (int(j),)))
    for j in np.nonzero(inst.max_stock < 0)[0]:
        out.append(Violation("max_stock", "max_stock must be nonnegative", (int(j),)))
    for i in np.nonzero(~(inst.fixed_cost >= 0))[0]:
        out.append(Violation("fixed_cost", "fixed_cost must be nonnegative", (int(i),)))
    for name in ("regular_cost", "lead_time"):
        for i, j in zip(*np.nonzero(~(getattr(inst, name) >= 0))):
            out.append(Violation(name, f"{name} must be nonnegative", (int(i), int(j))))

    r, t, e = inst.regular_cost, inst.lead_time, inst.expedited_cost
    # ordering[i, i2, j]: r_ij >= r_i2j must coincide with t_ij >= t_i2j
    r_ge = r[:, None, :] >= r[None, :, :]
    t_ge = t[:, None, :] >= t[None, :, :]
    for i, i2, j in zip(*np.nonzero(r_ge != t_ge)):
        if i < i2 or r_ge[i2, i, j] == t_ge[i2, i, j]:
            out.append(Violation("ordering", "cost/lead-time ordering violated",
                                 (int(i), int(i2), int(j))))
    rmax = r.max(axis=0) if I else np.zeros(J)
    for i2, j in zip(*np.nonzero(~(e > rmax[None, :]))):
        out.append(Violation("expedited", "expedited cost must strictly exceed regular cost",
                             (int(i2), int(j), int(r[:, j].argmax()))))
    return out


def check_valid(inst: Instance) -> Instance:
    bad = validate(inst)
    if bad:
        raise InstanceError("; ".join(str(v) for v in bad[:5]) + (" ..." if len(bad) > 5 else ""), bad)
    return inst


def load_instance(path) -> Instance:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"parse error: {exc}") from exc
    return check_valid(Instance.from_dict(data))


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(inst.to_dict(), indent=1) + "\n", encoding="utf-8")


# -- generator -----------------------------------------------------------------

def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance; broadcasts over numpy arrays."""
    p1, p2 = np.radians(lat1), np.radians(lat2)
    dphi = p2 - p1
    dlmb = np.radians(lon2) - np.radians(lon1)
    a = np.sin(dphi / 2) ** 2 + np.cos(p1) * np.cos(p2) * np.sin(dlmb / 2) ** 2
    return 2 * EARTH_RADIUS_KM * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def distance_matrix(sites) -> np.ndarray:
    lat = np.array([s.lat for s in sites], dtype=float)
    lon = np.array([s.lon for s in sites], dtype=float)
    dist = haversine_km(lat[:, None], lon[:, None], lat[None, :], lon[None, :])
    np.fill_diagonal(dist, 0.0)
    return dist


def load_sites(path) -> tuple[Site, ...]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = {"name", "lat", "lon", "city_pop", "state_pop"} - set(reader.fieldnames or ())
        if missing:
            raise InstanceError(f"site CSV missing columns {sorted(missing)}")
        return tuple(
            Site(row["name"], float(row["lat"]), float(row["lon"]),
                 float(row["city_pop"]), float(row["state_pop"]))
            for row in reader
        )


def bundled_sites() -> tuple[Site, ...]:
    """48 continental state capitals plus Washington D.C. (2020 census figures)."""
    with resources.as_file(resources.files(__package__) / "data" / "capitals49.csv") as p:
        return load_sites(p)


@dataclass(frozen=True)
class GeneratorParams:
    h: float = 100.0
    c_r: float = 0.01
    c_e: float = 1.0
    c_f: float = 0.02
    c_d: float = 1e-5
    c_l: float = 1e-4
    L: int = 3
    q: float = 0.1
    seed: int = 0
    sites: tuple[Site, ...] = ()
    max_stock: int | None = None  # None: per-terminal Erlang cap
    stock_tol: float = 1e-6
    stock_cap: int = 200


def generate_synthetic(params: GeneratorParams) -> Instance:
    """One co-located supplier and terminal per site.

    ``e_ij = (1 + c_e * u_ij) * max_i' r_i'j`` where the ``u_ij`` are SplitMix64
    unit draws on (0, 1] taken row-major (supplier outer, terminal inner).
    """
    sites = tuple(params.sites)
    if not sites:
        raise InstanceError("empty site list")
    n = len(sites)
    dist = distance_matrix(sites)
    r = params.c_r * dist
    t = params.c_l * dist
    rmax = r.max(axis=0)
    rng = SplitMix64(params.seed)
    u = np.array([[rng.next_unit() for _ in range(n)] for _ in range(n)])
    e = (1.0 + params.c_e * u) * rmax[None, :]
    demand = np.array([params.c_d * s.state_pop for s in sites])
    fixed = np.array([params.c_f * s.city_pop for s in sites])
    if params.max_stock is None:
        rho_max = demand * t.max(axis=0)
        cap = [erlang_cap(float(x), params.stock_tol, params.stock_cap) for x in rho_max]
    else:
        cap = [params.max_stock] * n
    return Instance(
        fixed_cost=fixed,
        demand=demand,
        holding=np.full(n, float(params.h)),
        max_stock=cap,
        regular_cost=r,
        expedited_cost=e,
        lead_time=t,
        q=params.q,
        L=params.L,
        sites=tuple(Site(s.name, s.lat, s.lon) for s in sites),
    )


def random_instance(rng: np.random.Generator, n_suppliers: int, n_terminals: int, L: int,
                    max_stock: int, q: float | None = None) -> Instance:
    """Small random instance satisfying every invariant (for tests and oracles)."""
    r = rng.uniform(1.0, 10.0, size=(n_suppliers, n_terminals))
    # t strictly increasing in r per terminal keeps the co-monotone invariant
    t = r * rng.uniform(0.02, 0.3, size=(1, n_terminals))
    e = r.max(axis=0)[None, :] * rng.uniform(1.2, 4.0, size=(n_suppliers, n_terminals))
    return Instance(
        fixed_cost=rng.uniform(5.0, 60.0, size=n_suppliers),
        demand=rng.uniform(1.0, 20.0, size=n_terminals),
        holding=rng.uniform(0.5, 10.0, size=n_terminals),
        max_stock=np.full(n_terminals, max_stock),
        regular_cost=r,
        expedited_cost=e,
        lead_time=t,
        q=float(rng.uniform(0.0, 0.6)) if q is None else q,
        L=L,
    )
