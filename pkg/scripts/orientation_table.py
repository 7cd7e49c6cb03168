#!/usr/bin/env python3
"""Classify every built-in policy on a small benchmark and print a table.

Usage: python scripts/orientation_table.py [--objective onemax:n=8] [--horizon 200]
"""

import argparse
import time

from lsmdp import LocalSearchMdp, classify, parse_objective, parse_policy

POLICIES = ["hc", "hc:literal", "walk", "metropolis:T=1", "sa:T0=10,rate=0.9"]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--objective", default="onemax:n=8")
    parser.add_argument("--horizon", type=int, default=200)
    args = parser.parse_args()

    mdp = LocalSearchMdp(parse_objective(args.objective))
    print(f"objective: {args.objective}  (|S| = {mdp.num_states})")
    print(f"{'policy':<24} {'classification':<28} {'delta*':>12} {'time':>8}")
    for descriptor in POLICIES:
        policy = parse_policy(descriptor)
        started = time.perf_counter()
        report = classify(policy, mdp, horizon=args.horizon)
        elapsed = time.perf_counter() - started
        star = "inf" if report.series_max is None else f"{report.series_max:.6g}"
        print(f"{descriptor:<24} {report.classification.describe():<28} "
              f"{star:>12} {elapsed:>7.2f}s")


if __name__ == "__main__":
    main()
