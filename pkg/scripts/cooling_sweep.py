#!/usr/bin/env python3
"""Sweep annealing cooling rates: balanced constant vs simulated hit rate.

For each cooling rate the script reports the classification (with the
balanced constant C when it exists) and the fraction of seeded runs that
reach the known optimum.  Prints CSV to stdout.

Usage: python scripts/cooling_sweep.py [--n 10] [--t0 10] [--trajectories 100]
"""

import argparse

from lsmdp import (LocalSearchMdp, SimulatedAnnealing, classify, make_onemax,
                   run_batch)

RATES = [0.5, 0.7, 0.8, 0.9, 0.95, 0.98]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--n", type=int, default=10)
    parser.add_argument("--t0", type=float, default=10.0)
    parser.add_argument("--trajectories", type=int, default=100)
    parser.add_argument("--horizon", type=int, default=1000)
    parser.add_argument("--base-seed", type=int, default=0)
    args = parser.parse_args()

    mdp = LocalSearchMdp(make_onemax(args.n))
    print("rate,classification,C,hit_rate,best_final_mean")
    for rate in RATES:
        policy = SimulatedAnnealing(args.t0, rate)
        report = classify(policy, mdp)
        summary = run_batch(policy, mdp, "uniform", args.horizon, args.trajectories,
                            args.base_seed)
        constant = ("" if report.classification.constant is None
                    else repr(report.classification.constant))
        print(f"{rate},{report.classification.kind},{constant},"
              f"{summary.hit_rate},{summary.best_final_mean}")


if __name__ == "__main__":
    main()
