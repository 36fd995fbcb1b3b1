#!/usr/bin/env python3
"""Benchmark the numba trial kernel against the pure-numpy fallback.

Both backends draw identical per-trial substreams, so besides timing this
doubles as an end-to-end equivalence check on the coverage estimate.
"""

import argparse
import math
import time

from sdmacov.analytic import NetworkConfig
from sdmacov.montecarlo import SimParams, default_window_radius, estimate_cp
from sdmacov.pathloss import make_pathloss


def run(backend, cfg, model, sim, repeats):
    # First call includes JIT compilation for the numba backend.
    est = estimate_cp(cfg, model, sim, backend=backend)
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        est = estimate_cp(cfg, model, sim, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return est, best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20_000)
    parser.add_argument("--lambda-per-km2", type=float, default=1000.0)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    model = make_pathloss([2.5, 4.0], [10.0])
    cfg = NetworkConfig(
        lambda_bs=args.lambda_per_km2 * 1e-6,
        power=10 ** ((23 - 30) / 10),
        tau=10.0,
        delta_h=2.0,
        n_antennas=16,
        n_users=2,
    )
    sim = SimParams(
        window_radius=default_window_radius(cfg, model),
        trials=args.trials,
        seed=42,
    )
    mu = cfg.lambda_bs * math.pi * sim.window_radius ** 2
    print(f"{args.trials} trials, lambda={args.lambda_per_km2:g}/km^2, "
          f"window {sim.window_radius:.0f} m (~{mu:.0f} points/trial)")

    results = {}
    for backend in ("numba", "numpy"):
        est, best = run(backend, cfg, model, sim, args.repeats)
        results[backend] = (est, best)
        rate = args.trials / best
        print(f"  {backend:>5}: {best:8.3f} s  ({rate:10.0f} trials/s)   "
              f"cp_hat = {est.cp_hat:.5f} +- {est.std_err:.5f}")

    cp_a, cp_b = results["numba"][0].cp_hat, results["numpy"][0].cp_hat
    print(f"  speedup: {results['numpy'][1] / results['numba'][1]:.1f}x, "
          f"estimates identical: {cp_a == cp_b}")


if __name__ == "__main__":
    main()
