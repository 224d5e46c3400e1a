"""Operating-cost minimization for a VCC site fed by grid, solar panel and battery.

Per slot ``t`` the flows are grid->load, grid->battery, panel->load,
panel->battery, battery->load, plus grid draw, panel output and battery state.
Panel area and battery capacity are sized jointly with the dispatch.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .lp import LinearProgram, LpSolution, LpStatus, solve
from .scenario import EnergyScenario

FLOWS = ("e_g_l", "e_g_b", "e_p_l", "e_p_b", "e_b_l", "e_g", "e_p", "e_b")
CSV_COLUMNS = ("t", "e_g", "e_p", "e_b", "e_g_l", "e_g_b", "e_p_l", "e_p_b", "e_b_l")


class OpexError(RuntimeError):
    def __init__(self, status: str, message: str):
        self.status = status
        super().__init__(message)


@dataclass(frozen=True, eq=False)
class EnergyPlan:
    flows: dict[str, np.ndarray]
    a_p: float
    e_b_max: float
    total_cost: float
    iterations: int = field(default=0, compare=False)

    def __getattr__(self, name):
        flows = self.__dict__.get("flows")
        if flows is not None and name in flows:
            return flows[name]
        raise AttributeError(name)

    @property
    def T(self) -> int:
        return len(self.flows["e_g"])

    def to_dict(self) -> dict:
        return {
            "a_p": self.a_p,
            "e_b_max": self.e_b_max,
            "total_cost": self.total_cost,
            "flows": {k: [float(v) for v in self.flows[k]] for k in FLOWS},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def dispatch_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for t in range(self.T):
            w.writerow([t + 1] + [repr(float(self.flows[k][t])) for k in CSV_COLUMNS[1:]])
        return buf.getvalue()

    def summary_csv(self) -> str:
        return f"a_p,e_b_max,total_cost\n{self.a_p!r},{self.e_b_max!r},{self.total_cost!r}\n"


def apply_power_saving(load, traffic, threshold: float, idle_floor: float = 0.0) -> np.ndarray:
    """Replace the load by ``idle_floor`` in slots whose traffic is below ``threshold``."""
    load = np.asarray(load, dtype=float)
    traffic = np.asarray(traffic, dtype=float)
    if load.shape != traffic.shape:
        raise ValueError(f"load and traffic lengths differ ({load.size} vs {traffic.size})")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return np.where(traffic < threshold, idle_floor, load)


def var_index(name: str, t: int, T: int) -> int:
    """Column of flow ``name`` at slot ``t`` (0-based); panel area and capacity follow."""
    return FLOWS.index(name) * T + t


def build_energy_lp(e: EnergyScenario, fixed_battery: float | None = None) -> LinearProgram:
    T = e.T
    n = 8 * T + 2
    AP, CAP = 8 * T, 8 * T + 1

    def ix(name, t):
        return var_index(name, t, T)

    c = np.zeros(n)
    c[[ix("e_g", t) for t in range(T)]] = e.c_g
    c[AP] = e.c_p
    c[CAP] = e.c_b

    ub_rows, ub_rhs = [], []

    def ub(coeffs: dict[int, float], rhs: float):
        row = np.zeros(n)
        for j, v in coeffs.items():
            row[j] += v
        ub_rows.append(row)
        ub_rhs.append(rhs)

    eq_rows, eq_rhs = [], []
    for t in range(T):
        ub({ix("e_g_l", t): 1, ix("e_g_b", t): 1, ix("e_g", t): -1}, 0.0)
        ub({ix("e_p_l", t): 1, ix("e_p_b", t): 1, ix("e_p", t): -1}, 0.0)
        # e_b(t) <= rho*(e_g_b + e_p_b) - e_b_l + e_b(t-1)
        rec = {ix("e_b", t): 1, ix("e_g_b", t): -e.rho, ix("e_p_b", t): -e.rho, ix("e_b_l", t): 1}
        if t > 0:
            rec[ix("e_b", t - 1)] = -1
        ub(rec, e.e_b0 if t == 0 else 0.0)
        ub({ix("e_g_l", t): -1, ix("e_p_l", t): -1, ix("e_b_l", t): -e.phi}, -e.load[t])
        row = np.zeros(n)
        row[ix("e_p", t)] = 1.0
        row[AP] = -e.gamma * e.sigma[t]
        eq_rows.append(row)
        eq_rhs.append(0.0)
    for t in range(T):
        ub({ix("e_b", t): 1, CAP: -1}, 0.0)

    upper = np.full(n, np.inf)
    if e.grid_available is not None:
        for t, ok in enumerate(e.grid_available):
            if not ok:
                upper[ix("e_g", t)] = 0.0
    if fixed_battery is not None:
        if fixed_battery < 0:
            raise ValueError("fixed battery capacity must be nonnegative")
        row = np.zeros(n)
        row[CAP] = 1.0
        eq_rows.append(row)
        eq_rhs.append(float(fixed_battery))

    names = tuple(f"{k}[{t + 1}]" for k in FLOWS for t in range(T)) + ("a_p", "e_b_max")
    return LinearProgram(
        c=c, A_ub=np.array(ub_rows), b_ub=np.array(ub_rhs),
        A_eq=np.array(eq_rows), b_eq=np.array(eq_rhs),
        upper=upper if np.isfinite(upper).any() else None, names=names,
    )


def unpack(sol: LpSolution, T: int) -> EnergyPlan:
    x = sol.x
    flows = {k: x[i * T:(i + 1) * T].copy() for i, k in enumerate(FLOWS)}
    return EnergyPlan(flows=flows, a_p=float(x[8 * T]), e_b_max=float(x[8 * T + 1]),
                      total_cost=sol.objective_value, iterations=sol.iterations)


def optimize_opex(e: EnergyScenario, fixed_battery: float | None = None, backend=None) -> EnergyPlan:
    """Minimum operating cost plan; raises ``OpexError`` if the LP has no optimum."""
    sol = solve(build_energy_lp(e, fixed_battery), backend=backend)
    if sol.status is LpStatus.INFEASIBLE:
        raise OpexError("infeasible", "load cannot be met with the available energy sources")
    if sol.status is LpStatus.UNBOUNDED:
        raise OpexError("internal", "energy LP unbounded; costs must be nonnegative")
    if sol.status is not LpStatus.OPTIMAL:
        raise OpexError("internal", f"energy LP stopped with status {sol.status.value}")
    return unpack(sol, e.T)


@dataclass(frozen=True)
class PlanReport:
    residuals: dict[str, float]
    tol: float

    @property
    def passed(self) -> bool:
        return all(v <= self.tol for v in self.residuals.values())

    def failures(self) -> dict[str, float]:
        return {k: v for k, v in self.residuals.items() if v > self.tol}


def verify_plan(e: EnergyScenario, plan: EnergyPlan, tol: float = 1e-7) -> PlanReport:
    """Largest violation of each constraint family of the energy model."""
    T = e.T
    if plan.T != T:
        raise ValueError(f"plan has {plan.T} slots, scenario has {T}")
    f = {k: np.asarray(v, dtype=float) for k, v in plan.flows.items()}
    load = np.asarray(e.load, dtype=float)
    sigma = np.asarray(e.sigma, dtype=float)
    prev = np.concatenate([[e.e_b0], f["e_b"][:-1]])

    def worst(v) -> float:
        return float(max(0.0, np.max(v))) if np.size(v) else 0.0

    res = {
        "nonnegativity": worst(-np.concatenate([*(f[k] for k in FLOWS), [plan.a_p, plan.e_b_max]])),
        "grid_balance": worst(f["e_g_l"] + f["e_g_b"] - f["e_g"]),
        "solar_balance": worst(f["e_p_l"] + f["e_p_b"] - f["e_p"]),
        "battery_recursion": worst(f["e_b"] - (e.rho * (f["e_g_b"] + f["e_p_b"]) - f["e_b_l"] + prev)),
        "load": worst(load - (f["e_g_l"] + f["e_p_l"] + e.phi * f["e_b_l"])),
        "solar_generation": float(np.max(np.abs(f["e_p"] - e.gamma * plan.a_p * sigma))),
        "capacity": worst(f["e_b"] - plan.e_b_max),
    }
    if e.grid_available is not None:
        off = ~np.asarray(e.grid_available, dtype=bool)
        res["grid_availability"] = worst(f["e_g"][off]) if off.any() else 0.0
    cost = float(np.dot(e.c_g, f["e_g"]) + e.c_p * plan.a_p + e.c_b * plan.e_b_max)
    res["objective"] = abs(cost - plan.total_cost) / max(1.0, abs(cost))
    return PlanReport(res, tol)
