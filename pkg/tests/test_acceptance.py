"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` (or ``-v``) to see the report lines.
"""
import io
import json
import math
import random
import time
from contextlib import redirect_stdout
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from oracles import lp_grid_oracle, lp_vertex_oracle, opex_grid_oracle
from ruralplan.capex import (
    CapexInputs, CapexResult, brute_force_capex, cost_per_user_analytic, inputs_from_scenario,
    optimize_capex, relay_sweep, verify_capex,
)
from ruralplan.cli import main
from ruralplan.lp import LinearProgram, LpStatus, solve
from ruralplan.opex import FLOWS, EnergyPlan, apply_power_saving, optimize_opex, verify_plan
from ruralplan.scenario import EnergyScenario, read_scenario, replace_energy
from ruralplan.topology import RELAY_POINT, build_plan

pytestmark = pytest.mark.acceptance

ROOT = Path(__file__).parent.parent
FIXTURES = Path(__file__).parent / "fixtures"
DEMO = ROOT / "scenarios" / "demo_24h.json"
C_A, C_U = 1900.0, 3500.0


def report(capsys, number: int, title: str, ok: bool, elapsed: float, limit: float, detail: str = ""):
    passed = ok and elapsed < limit
    line = f"criterion {number} {'PASS' if passed else 'FAIL'}: {title} ({elapsed:.2f}s, limit {limit:g}s)"
    if detail:
        line += f" {detail}"
    with capsys.disabled():
        print("\n" + line)
    assert ok, detail
    assert elapsed < limit, f"runtime {elapsed:.2f}s exceeds {limit}s"


def perturbed_inputs(rng: random.Random, with_curve: bool) -> CapexInputs:
    N = rng.randint(50, 10_000)
    A = rng.uniform(1.0, 500.0)
    curve = None
    if with_curve:
        knots = sorted(rng.sample([0.05 + 0.02 * k for k in range(21)], rng.randint(2, 4)))
        curve = tuple(zip(knots, sorted(rng.uniform(300, 8000) for _ in knots)))
    return CapexInputs(A=A, N=N, lam=N / A, c_U=C_U * rng.uniform(0.8, 1.2), c_A=C_A * rng.uniform(0.8, 1.2),
                       R_bounds=(0.05, 0.45), n_R_min=rng.randint(0, 3), ap_curve=curve)


def test_criterion_1_relay_cost_linearity(capsys):
    start = time.perf_counter()
    rng = random.Random(1)
    worst = 0.0
    for _ in range(100):
        inputs = perturbed_inputs(rng, with_curve=False)
        # the sweep is taken at the optimal radius, as the sweep-relays command does
        R = optimize_capex(inputs).R_star
        rows = relay_sweep(inputs, range(6), R)
        step = Fraction(inputs.c_U) / Fraction(inputs.N)
        for (_, a), (_, b) in zip(rows, rows[1:]):
            worst = max(worst, float(abs((Fraction(b) - Fraction(a)) - step) / step))
    report(capsys, 1, "relay sweep increments equal c_U/N", worst <= 1e-12,
           time.perf_counter() - start, 1, f"max rel err {worst:.2e}")


def test_criterion_2_backhaul_ratios(capsys):
    start = time.perf_counter()
    buf = io.StringIO()
    with redirect_stdout(buf):
        code = main(["compare-backhaul", str(FIXTURES / "six_villages.json"), "--json"])
    ratios = {r["label"]: r["ratio"] for r in json.loads(buf.getvalue())["rows"]}
    r1, r3 = ratios["fiber_1km"], ratios["fiber_3km"]
    ok = code == 0 and abs(r1 - 2.5) <= 0.15 * 2.5 and r3 == 5.5 and abs(r3 - 5.0) <= 0.15 * 5.0
    report(capsys, 2, "fiber backhaul ratios", ok, time.perf_counter() - start, 1, f"1km={r1:g} 3km={r3:g}")


def test_criterion_3_capex_oracle_equivalence(capsys):
    start = time.perf_counter()
    rng = random.Random(3)
    bad = []
    for k in range(200):
        inputs = perturbed_inputs(rng, with_curve=k % 2 == 1)
        r, b = optimize_capex(inputs), brute_force_capex(inputs, grid=10_000)
        if r.feasible != b.feasible:
            bad.append((k, "feasibility"))
        elif r.feasible:
            if abs(r.cost_per_user - b.cost_per_user) > 1e-6 * abs(b.cost_per_user):
                bad.append((k, "objective"))
            if (r.n_A, r.n_R) != (b.n_A, b.n_R):
                bad.append((k, "counts"))
    report(capsys, 3, "optimize_capex matches brute force on 200 instances", not bad,
           time.perf_counter() - start, 30, f"mismatches={bad[:5]}")


def test_criterion_4_six_village_reconstruction(capsys):
    start = time.perf_counter()
    plan = build_plan(read_scenario(FIXTURES / "six_villages.json"), 0.45)
    de, bc = plan.site_of("D"), plan.site_of("B")
    ok = (plan.n_R == 1 and plan.n_A == 3
          and de is plan.site_of("E") and de.served_villages == ("D", "E") and de.role == RELAY_POINT
          and bc is plan.site_of("C") and bc.served_villages == ("B", "C") and bc.parent == de.id
          and plan.uncovered_villages == ())
    report(capsys, 4, "six-village plan structure", ok, time.perf_counter() - start, 1,
           f"n_A={plan.n_A} n_R={plan.n_R}")


def micro_instance(rng: random.Random) -> EnergyScenario:
    solar = rng.random() < 0.5
    T = rng.randint(1, 2) if solar else rng.randint(1, 3)
    return EnergyScenario(
        c_g=tuple(rng.choice([0.05, 0.1, 0.15, 0.2, 0.25]) for _ in range(T)),
        load=tuple(rng.randint(0, 50) / 100 for _ in range(T)),
        sigma=tuple(rng.choice([0.5, 1.0]) for _ in range(T)) if solar else (0.0,) * T,
        rho=rng.uniform(0.85, 1.0), phi=rng.uniform(0.85, 1.0), gamma=rng.uniform(0.5, 1.0),
        c_p=rng.uniform(0.01, 0.1), c_b=rng.uniform(0.0, 0.05),
    )


def test_criterion_5_opex_fixtures_and_oracle(capsys):
    start = time.perf_counter()
    arb = optimize_opex(read_scenario(FIXTURES / "arbitrage_2slot.json").energy).total_cost
    zero = optimize_opex(read_scenario(FIXTURES / "zero_load.json").energy).total_cost
    e = read_scenario(FIXTURES / "grid_only.json").energy
    grid = optimize_opex(e).total_cost
    expected = math.fsum(c * l for c, l in zip(e.c_g, e.load))
    rng = random.Random(5)
    gaps = []
    for _ in range(50):
        m = micro_instance(rng)
        ref = opex_grid_oracle(m.load, m.c_g, m.sigma, m.rho, m.phi, m.gamma, m.c_p, m.c_b)
        gaps.append(optimize_opex(m).total_cost - ref)
    ok = abs(arb - 5.5) <= 1e-6 and zero == 0.0 and abs(grid - expected) <= 1e-12 and max(gaps) <= 1e-2
    report(capsys, 5, "energy LP fixtures and dispatch-grid oracle", ok, time.perf_counter() - start, 20,
           f"arbitrage={arb:.9g} zero={zero:g} grid_only={grid:.12g} max(lp-oracle)={max(gaps):.2e}")


def _cli(*argv) -> int:
    with redirect_stdout(io.StringIO()):
        return main([str(a) for a in argv])


def test_criterion_6_verification_gate(capsys, tmp_path):
    start = time.perf_counter()
    problems = []
    for scen in [FIXTURES / "six_villages.json", DEMO]:
        s = read_scenario(scen)
        for extra in ([], ["--fixed-nr", "2"], ["--fixed-radius", "0.3"]):
            out = tmp_path / f"{scen.stem}{len(extra)}{extra[-1] if extra else ''}.json"
            if _cli("capex", scen, "--out", out, *extra) != 0:
                problems.append(f"capex {scen.name} {extra} failed")
                continue
            result = CapexResult(**json.loads(out.read_text()))
            n_R = int(extra[1]) if extra and extra[0] == "--fixed-nr" else None
            bounds = (float(extra[1]),) * 2 if extra and extra[0] == "--fixed-radius" else None
            inputs = inputs_from_scenario(s, n_R_min=n_R, n_R_max=n_R, R_bounds=bounds)
            problems += verify_capex(result, inputs, 1e-7)
    energy_runs = [(FIXTURES / "arbitrage_2slot.json", [], None), (FIXTURES / "grid_only.json", [], None),
                   (FIXTURES / "zero_load.json", [], None), (DEMO, [], None), (DEMO, ["--threshold", "3"], 3.0),
                   (FIXTURES / "arbitrage_2slot.json", ["--fixed-battery", "2"], None)]
    plans = []
    for k, (scen, extra, threshold) in enumerate(energy_runs):
        out = tmp_path / f"energy{k}.json"
        if _cli("opex", scen, "--out", out, *extra) != 0:
            problems.append(f"opex {scen.name} {extra} failed")
            continue
        doc = json.loads(out.read_text())
        plan = EnergyPlan({f: np.array(v) for f, v in doc["flows"].items()}, doc["a_p"], doc["e_b_max"],
                          doc["total_cost"])
        s = read_scenario(scen)
        e = s.energy
        if threshold is not None:
            e = replace_energy(s, load=tuple(apply_power_saving(e.load, e.traffic, threshold, e.idle_floor))).energy
        report_ = verify_plan(e, plan, 1e-7)
        if not report_.passed:
            problems.append(f"opex {scen.name} {extra}: {report_.failures()}")
        plans.append((e, plan))
    missed = 0
    for e, plan in plans:
        for name in FLOWS:
            for t in range(e.T):
                for delta in (1e-3, -1e-3):
                    flows = {f: v.copy() for f, v in plan.flows.items()}
                    flows[name][t] += delta
                    mutated = EnergyPlan(flows, plan.a_p, plan.e_b_max, plan.total_cost)
                    missed += verify_plan(e, mutated, 1e-7).passed
    ok = not problems and missed == 0
    report(capsys, 6, "CLI outputs pass verifiers and 1e-3 mutations are caught", ok,
           time.perf_counter() - start, 5, f"problems={problems[:3]} missed_mutations={missed}")


BEALE = LinearProgram(c=[-0.75, 150, -0.02, 6], A_ub=[[0.25, -60, -0.04, 9], [0.5, -90, -0.02, 3], [0, 0, 1, 0]],
                      b_ub=[0, 0, 1])
TEXTBOOK = [
    (LinearProgram(c=[1.0], A_ub=[[-1.0]], b_ub=[-3.0]), LpStatus.OPTIMAL, 3.0),
    (LinearProgram(c=[-1.0, -1.0], A_ub=[[1, 1]], b_ub=[1]), LpStatus.OPTIMAL, -1.0),
    (LinearProgram(c=[1.0, 10.0], A_eq=[[1, 1]], b_eq=[5]), LpStatus.OPTIMAL, 5.0),
    (LinearProgram(c=[-3, -5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18]), LpStatus.OPTIMAL, -36.0),
    (BEALE, LpStatus.OPTIMAL, -0.05),
    (LinearProgram(c=[1.0], A_ub=[[1.0], [-1.0]], b_ub=[1.0, -2.0]), LpStatus.INFEASIBLE, None),
    (LinearProgram(c=[-1.0, 0.0], A_ub=[[1, -1]], b_ub=[1]), LpStatus.UNBOUNDED, None),
]


def test_criterion_7_simplex_core(capsys):
    start = time.perf_counter()
    bad = []
    for k, (lp, status, obj) in enumerate(TEXTBOOK):
        sol = solve(lp)
        if sol.status is not status or (obj is not None and abs(sol.objective_value - obj) > 1e-8):
            bad.append(f"fixture {k}: {sol.status.value} {sol.objective_value}")
    rng = np.random.default_rng(7)
    for k in range(50):
        n = int(rng.integers(1, 3)) if k < 25 else int(rng.integers(3, 7))
        m = int(rng.integers(1, 7))
        c, A = rng.uniform(-1, 1, n), rng.uniform(-1, 1, (m, n))
        b, upper = rng.uniform(0.1, 1.0, m), rng.uniform(0.5, 1.5, n)
        sol = solve(LinearProgram(c=c, A_ub=A, b_ub=b, upper=upper))
        # 10^3 per axis where tractable; higher dimensions use a coarser lattice plus exact vertices
        per_axis = 1000 if n <= 2 else int((2e6) ** (1 / n))
        grid = lp_grid_oracle(c, A, b, upper, per_axis=per_axis)
        exact = lp_vertex_oracle(c, A, b, upper)
        if not (sol.optimal and sol.objective_value <= grid + 1e-4 and abs(sol.objective_value - exact) <= 1e-8):
            bad.append(f"random {k}: {sol.objective_value} grid={grid} exact={exact}")
    report(capsys, 7, "simplex fixtures and random-LP oracle bound", not bad, time.perf_counter() - start, 10,
           f"failures={bad[:3]}")


def _random_energy(rng: random.Random) -> EnergyScenario:
    T = rng.randint(1, 6)
    return EnergyScenario(
        c_g=tuple(rng.uniform(0.05, 2.0) for _ in range(T)), load=tuple(rng.uniform(0, 3) for _ in range(T)),
        sigma=(0.0,) * T, rho=rng.uniform(0.5, 1.0), phi=rng.uniform(0.5, 1.0), gamma=rng.uniform(0.1, 1.0),
        c_p=rng.uniform(0.05, 5.0), c_b=rng.uniform(0.01, 2.0),
    )


def test_criterion_8_property_suites(capsys, tmp_path):
    start = time.perf_counter()
    rng = random.Random(8)
    fails = {"relay_monotone": 0, "radius_monotone": 0, "ceiling_gap": 0, "no_free_energy": 0, "determinism": 0}
    cases = 1000
    for _ in range(cases):
        c_A, c_U = rng.uniform(0, 1e4), rng.uniform(1e-3, 1e4)
        A, R, N, n_R = rng.uniform(0.01, 500), rng.uniform(0.05, 0.44), rng.randint(1, 10_000), rng.randint(0, 50)
        a, b = cost_per_user_analytic(c_A, c_U, A, R, n_R, N), cost_per_user_analytic(c_A, c_U, A, R, n_R + 1, N)
        fails["relay_monotone"] += not b > a
        dR = rng.uniform(1e-3, 0.5)
        fails["radius_monotone"] += not (cost_per_user_analytic(c_A + 1, c_U, A, R + dR, n_R, N)
                                         < cost_per_user_analytic(c_A + 1, c_U, A, R, n_R, N))

        inputs = perturbed_inputs(rng, with_curve=rng.random() < 0.5)
        r = optimize_capex(inputs)
        if r.feasible:
            gap = r.C_infra_exact - r.C_infra_analytic
            slack = 1e-9 * r.C_infra_exact
            fails["ceiling_gap"] += not (-slack <= gap <= r.c_A + slack)

        e = _random_energy(rng)
        plan = optimize_opex(e)
        fails["no_free_energy"] += not math.fsum(e.load) <= float(plan.e_g.sum()) + 1e-7
        fails["determinism"] += (optimize_capex(inputs).to_json() != r.to_json()
                                 or optimize_opex(e).to_json() != plan.to_json())
    # byte-identical command reruns
    for command in (["plan"], ["capex"], ["sweep-relays"], ["compare-backhaul"], ["opex"]):
        blobs = []
        for k in range(2):
            out = tmp_path / f"{command[0]}{k}" / "out.json"
            _cli(command[0], DEMO, "--out", out)
            blobs.append({p.name: p.read_bytes() for p in out.parent.iterdir() if ".meta." not in p.name})
        fails["determinism"] += blobs[0] != blobs[1]
    report(capsys, 8, f"property suites at {cases} cases each", not any(fails.values()),
           time.perf_counter() - start, 60, f"failures={fails}")
