#!/usr/bin/env python3
"""Run the surrogate-distance (MAD) grid and write one combined table.

Median regression (tau = 0.5) with bump-kernel smoothed fits at
m = 5, 10, 15; error distribution in {t4, normal01}, n in {100, 200}.
MAD is the mean distance between sqrt(n)*(theta_hat - theta0) and the
quadratic-surrogate minimizer built from the true errors.
"""
import argparse
import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from mollikit.montecarlo import (ExperimentConfig, mad_table_csv,
                                 run_mad_experiment)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--replications", type=int, default=1000)
    parser.add_argument("--quick", action="store_true",
                        help="replications=50 for a fast sanity pass")
    parser.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    parser.add_argument("--seed", type=int, default=20260810)
    parser.add_argument("--out", default="mad_table")
    args = parser.parse_args()
    reps = 50 if args.quick else args.replications

    results = []
    for dist in ("t4", "normal01"):
        for n in (100, 200):
            cfg = ExperimentConfig(
                n=n, replications=reps, tau=0.5, error_dist=dist,
                m_list=(5.0, 10.0, 15.0), base_seed=args.seed, kernel="bump")
            res = run_mad_experiment(cfg, threads=args.threads)
            results.append(res)
            print(f"{dist} n={n}: MAD="
                  f"{ {k: round(v, 4) for k, v in res.mad_m.items()} } "
                  f"excluded={res.excluded}")

    table = mad_table_csv(results)
    with open(args.out + ".csv", "w", encoding="utf-8") as fh:
        fh.write(table)
    with open(args.out + ".json", "w", encoding="utf-8") as fh:
        json.dump([r.to_dict() for r in results], fh, indent=2)
    print(f"wrote {args.out}.csv and {args.out}.json")
    return 0


if __name__ == "__main__":
    sys.exit(main())
