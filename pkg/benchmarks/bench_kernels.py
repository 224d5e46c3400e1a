"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py --repeat 5
"""
from __future__ import annotations

import argparse
import random
import timeit

import numpy as np

from ruralplan import kernels
from ruralplan.capex import CapexInputs, brute_force_capex
from ruralplan.lp import solve
from ruralplan.opex import build_energy_lp
from ruralplan.scenario import EnergyScenario


def pivot_case(rows: int, cols: int):
    rng = np.random.default_rng(0)
    base = rng.normal(size=(rows, cols))
    base[0, 0] = 1.5

    def run(backend):
        T = base.copy()
        for k in range(20):
            backend.pivot(T, k % rows, k % cols)
    return run


def scan_case(grid: int):
    inputs = CapexInputs(A=120.0, N=2400, lam=20.0, c_U=3500.0, c_A=1900.0, R_bounds=(0.05, 0.45), n_R_min=2)
    return lambda backend: brute_force_capex(inputs, grid=grid, backend=backend)


def opex_case(T: int):
    rng = random.Random(0)
    e = EnergyScenario(
        c_g=tuple(rng.uniform(0.05, 0.3) for _ in range(T)), load=tuple(rng.uniform(0.1, 0.5) for _ in range(T)),
        sigma=tuple(max(0.0, np.sin(np.pi * ((t % 24) - 6) / 12)) for t in range(T)),
        rho=0.92, phi=0.92, gamma=0.18, c_p=0.03, c_b=0.12,
    )
    lp = build_energy_lp(e)
    return lambda backend: solve(lp, backend=backend)


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    cases = {
        "pivot 60x200 x20": pivot_case(60, 200),
        "capex scan 10^4 radii": scan_case(10_000),
        "energy LP T=24": opex_case(24),
        "energy LP T=72": opex_case(72),
    }
    backends = kernels.backends()
    names = sorted(backends)
    print(f"{'case':<24}" + "".join(f"{n + ' (ms)':>16}" for n in names) + f"{'speedup':>10}")
    for label, fn in cases.items():
        times = {}
        for n in names:
            fn(backends[n])  # warm up
            times[n] = min(timeit.repeat(lambda: fn(backends[n]), number=1, repeat=args.repeat)) * 1e3
        speed = times["python"] / times["cython"] if "cython" in times else float("nan")
        print(f"{label:<24}" + "".join(f"{times[n]:>16.2f}" for n in names) + f"{speed:>10.1f}x")


if __name__ == "__main__":
    main()
