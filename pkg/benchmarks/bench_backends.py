#!/usr/bin/env python3
"""Compare the compiled and reference simulation kernels.

Runs the ten-agent two-groups preset with every algorithm enabled and the
same observation panel on each available backend, reporting wall time,
steps per second, and the speedup of the compiled kernel when present.
"""

import argparse
import time

import numpy as np

from sociallearn.backend import available_backends
from sociallearn.dynamics import simulate
from sociallearn.harness import generate_scenario
from sociallearn.model import draw_observations


def time_backend(cfg, obs, name: str, repeats: int) -> tuple[float, object]:
    best = float("inf")
    traj = None
    for _ in range(repeats):
        start = time.perf_counter()
        traj = simulate(cfg, obs=obs, backend=name)
        best = min(best, time.perf_counter() - start)
    return best, traj


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--horizon", type=int, default=5000,
                        help="steps to simulate (default 5000)")
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions, best is kept (default 5)")
    args = parser.parse_args()

    cfg = generate_scenario("two-groups", horizon=args.horizon)
    obs = draw_observations(cfg)
    print(f"scenario: two-groups, {cfg.n_agents} agents, "
          f"{cfg.n_hypotheses} hypotheses, horizon {args.horizon}, "
          f"algorithms {', '.join(cfg.algorithms)}")

    names = available_backends()
    results = {}
    for name in names:
        elapsed, traj = time_backend(cfg, obs, name, args.repeats)
        results[name] = (elapsed, traj)
        print(f"{name:>8}: {elapsed * 1e3:8.1f} ms  "
              f"{args.horizon / elapsed:10.0f} steps/s")

    if "compiled" not in results:
        print("compiled backend not built; install with the extension "
              "to compare (pip install -e . --no-build-isolation)")
        return

    speedup = results["python"][0] / results["compiled"][0]
    worst = max(
        float(np.max(np.abs(results["python"][1].log_mu
                            - results["compiled"][1].log_mu))),
        float(np.max(np.abs(results["python"][1].log_pi
                            - results["compiled"][1].log_pi))),
    )
    print(f"speedup: {speedup:.1f}x   max |log difference|: {worst:.2e}")


if __name__ == "__main__":
    main()
