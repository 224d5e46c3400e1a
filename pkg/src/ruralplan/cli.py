"""Command-line front end.

Exit codes: 0 success, 1 validation failure or infeasible problem, 2 internal
error. Data files go to ``--out``; diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import os
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__, kernels
from .capex import (
    BASELINE_NOTE, CALIBRATED_BASELINE_USD, CapexError, backhaul_comparison, backhaul_csv,
    inputs_from_scenario, optimize_capex, relay_sweep, sweep_csv, verify_capex,
)
from .opex import OpexError, apply_power_saving, optimize_opex, verify_plan
from .scenario import ScenarioError, read_scenario, replace_energy
from .topology import build_plan

VERIFY_TOL = 1e-7


class CommandFailed(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


def _fmt(v: float) -> str:
    return f"{v:.10g}"


def _with_suffix(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _write_meta(path: Path, command: str, argv: list[str], outputs: list[Path]) -> None:
    meta = {
        "command": command,
        "argv": argv,
        "version": __version__,
        "kernel_backend": kernels.BACKEND,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "outputs": [str(p) for p in outputs],
    }
    _write(_with_suffix(path, ".meta.json"), json.dumps(meta, indent=2, sort_keys=True))


def _emit(args, summary: dict, human: str) -> None:
    if args.json:
        print(json.dumps(summary, sort_keys=True))
    else:
        print(human)


def _load(args):
    lenient = args.lenient or os.environ.get("RURALPLAN_LENIENT") == "1"
    try:
        return read_scenario(args.scenario, strict=not lenient)
    except FileNotFoundError:
        raise CommandFailed(1, f"scenario file not found: {args.scenario}") from None
    except ScenarioError as exc:
        raise CommandFailed(1, f"invalid scenario: {exc}") from None


def cmd_plan(args) -> int:
    scenario = _load(args)
    R = args.radius if args.radius is not None else scenario.radio.wifi_radius_bounds_km[1]
    plan = build_plan(scenario, R)
    outputs = []
    if args.out:
        out = Path(args.out)
        _write(out, plan.to_json())
        _write(_with_suffix(out, ".edges.csv"), plan.edge_list_csv())
        outputs = [out, _with_suffix(out, ".edges.csv")]
        _write_meta(out, "plan", args.argv, outputs)
    summary = {"n_A": plan.n_A, "n_R": plan.n_R, "uncovered": len(plan.uncovered_villages),
               "uncovered_villages": list(plan.uncovered_villages)}
    human = f"n_A={plan.n_A} n_R={plan.n_R} uncovered={len(plan.uncovered_villages)}"
    if plan.uncovered_villages:
        human += "\nuncovered villages: " + ", ".join(plan.uncovered_villages)
    _emit(args, summary, human)
    return 0


def _capex_inputs(args, scenario):
    lo, hi = scenario.radio.wifi_radius_bounds_km
    base = inputs_from_scenario(scenario)
    n_R_min, n_R_max, bounds = base.n_R_min, None, None
    fixed_nr = getattr(args, "fixed_nr", None)
    if fixed_nr is not None:
        if fixed_nr < base.n_R_min:
            raise CommandFailed(1, f"fixed n_R below topological minimum ({fixed_nr} < {base.n_R_min})")
        n_R_min = n_R_max = fixed_nr
    fixed_r = getattr(args, "fixed_radius", None)
    if fixed_r is not None:
        if not fixed_r > 0:
            raise CommandFailed(1, "fixed radius must be positive")
        if not lo <= fixed_r <= hi:
            print(f"warning: fixed radius {fixed_r} km outside wifi bounds [{lo}, {hi}]", file=sys.stderr)
        bounds = (fixed_r, fixed_r)
    return inputs_from_scenario(scenario, n_R_min=n_R_min, R_bounds=bounds, n_R_max=n_R_max)


def _solve_capex(args, scenario):
    try:
        inputs = _capex_inputs(args, scenario)
    except CapexError as exc:
        raise CommandFailed(1, f"invalid CAPEX inputs: {exc}") from None
    result = optimize_capex(inputs)
    if not result.feasible:
        raise CommandFailed(1, f"infeasible: {result.diagnostics}")
    problems = verify_capex(result, inputs, VERIFY_TOL)
    if problems:
        raise CommandFailed(2, "CAPEX result failed verification: " + "; ".join(problems))
    return inputs, result


def cmd_capex(args) -> int:
    scenario = _load(args)
    inputs, result = _solve_capex(args, scenario)
    if args.out:
        out = Path(args.out)
        _write(out, result.to_json())
        _write_meta(out, "capex", args.argv, [out])
    summary = {k: v for k, v in result.to_dict().items() if k != "diagnostics"}
    summary["n_R_min"] = inputs.n_R_min
    human = (f"n_A={result.n_A} n_R={result.n_R} R={_fmt(result.R_star)} km "
             f"cost_per_user={_fmt(result.cost_per_user)} USD "
             f"C_infra_exact={_fmt(result.C_infra_exact)} USD")
    _emit(args, summary, human)
    return 0


def cmd_sweep_relays(args) -> int:
    if args.max_nr < 0:
        raise CommandFailed(1, "--max-nr must be nonnegative")
    scenario = _load(args)
    inputs, result = _solve_capex(args, scenario)
    rows = relay_sweep(inputs, range(args.max_nr + 1), result.R_star)
    if args.out:
        out = Path(args.out)
        _write(out, sweep_csv(rows))
        _write_meta(out, "sweep-relays", args.argv, [out])
    summary = {"R": result.R_star, "rows": [{"n_R": k, "cost_per_user": v} for k, v in rows]}
    human = "\n".join([f"R={_fmt(result.R_star)} km", "n_R  cost_per_user"]
                      + [f"{k:<4d} {_fmt(v)}" for k, v in rows])
    _emit(args, summary, human)
    return 0


def _parse_lengths(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise CommandFailed(1, f"--fiber-km must be a comma-separated list of numbers, got {text!r}") from None


def cmd_compare_backhaul(args) -> int:
    scenario = _load(args)
    baseline = args.baseline
    if baseline is None:
        baseline = CALIBRATED_BASELINE_USD
        print(f"note: {BASELINE_NOTE}", file=sys.stderr)
    try:
        rows = backhaul_comparison(scenario.costs, baseline, _parse_lengths(args.fiber_km))
    except CapexError as exc:
        raise CommandFailed(1, str(exc)) from None
    if args.out:
        out = Path(args.out)
        _write(out, backhaul_csv(rows))
        _write_meta(out, "compare-backhaul", args.argv, [out])
    summary = {"baseline": baseline,
               "rows": [{"label": r.label, "cost": r.cost, "ratio": r.ratio} for r in rows]}
    human = "\n".join(["label            cost          ratio"]
                      + [f"{r.label:<16} {_fmt(r.cost):<13} {_fmt(r.ratio)}" for r in rows])
    _emit(args, summary, human)
    return 0


def cmd_opex(args) -> int:
    scenario = _load(args)
    if scenario.energy is None:
        raise CommandFailed(1, "energy section required")
    energy = scenario.energy
    if args.threshold is not None:
        if energy.traffic is None:
            raise CommandFailed(1, "--threshold needs an energy.traffic series")
        try:
            masked = apply_power_saving(energy.load, energy.traffic, args.threshold, energy.idle_floor)
        except ValueError as exc:
            raise CommandFailed(1, str(exc)) from None
        energy = replace_energy(scenario, load=tuple(float(v) for v in masked)).energy
    try:
        plan = optimize_opex(energy, fixed_battery=args.fixed_battery)
    except OpexError as exc:
        raise CommandFailed(1 if exc.status == "infeasible" else 2, str(exc)) from None
    report = verify_plan(energy, plan, VERIFY_TOL)
    if not report.passed:
        raise CommandFailed(2, f"energy plan failed verification: {report.failures()}")
    if args.out:
        out = Path(args.out)
        paths = [out, _with_suffix(out, ".dispatch.csv"), _with_suffix(out, ".summary.csv")]
        _write(paths[0], plan.to_json())
        _write(paths[1], plan.dispatch_csv())
        _write(paths[2], plan.summary_csv())
        _write_meta(out, "opex", args.argv, paths)
    summary = {"total_cost": plan.total_cost, "a_p": plan.a_p, "e_b_max": plan.e_b_max,
               "grid_energy": float(np.sum(plan.flows["e_g"]))}
    human = (f"total_cost={_fmt(plan.total_cost)} a_p={_fmt(plan.a_p)} "
             f"e_b_max={_fmt(plan.e_b_max)}")
    _emit(args, summary, human)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable summary on stdout")
    common.add_argument("--lenient", action="store_true", help="ignore unknown scenario keys")

    parser = argparse.ArgumentParser(prog="ruralplan", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", parents=[common], help="cluster villages and build the uplink tree")
    p.add_argument("scenario")
    p.add_argument("--radius", type=float, help="Wi-Fi radius in km (default: upper wifi bound)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("capex", parents=[common], help="minimize infrastructure cost per user")
    p.add_argument("scenario")
    p.add_argument("--out")
    p.add_argument("--fixed-nr", type=int)
    p.add_argument("--fixed-radius", type=float)
    p.set_defaults(func=cmd_capex)

    p = sub.add_parser("sweep-relays", parents=[common], help="cost per user against relay count")
    p.add_argument("scenario")
    p.add_argument("--max-nr", type=int, default=5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep_relays)

    p = sub.add_parser("compare-backhaul", parents=[common], help="5G versus fiber backhaul cost")
    p.add_argument("scenario")
    p.add_argument("--baseline", type=float, help="per-site cost in USD (default: calibrated 10000)")
    p.add_argument("--fiber-km", default="1,3", help="comma-separated fiber lengths in km")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare_backhaul)

    p = sub.add_parser("opex", parents=[common], help="minimum-cost grid/solar/battery schedule")
    p.add_argument("scenario")
    p.add_argument("--out")
    p.add_argument("--threshold", type=float, help="switch access points off below this traffic")
    p.add_argument("--fixed-battery", type=float, help="battery capacity in kWh (what-if mode)")
    p.set_defaults(func=cmd_opex)
    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and 1
    args.argv = argv
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("default")
            warnings.showwarning = _show_warning
            return args.func(args)
    except CommandFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001 - any escape is an internal error
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
