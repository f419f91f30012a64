#!/usr/bin/env python3
"""Run the matched-pair failure experiment at full scale and print the verdict.

With n = 2^17 and eps = 0.2 the sample budget is floor(ln n / (3 ln 5)) = 2,
and both the posterior rule and ERM fail far more often than 1/16.

Usage:
  python scripts/run_lower_bound.py [--n 131072] [--eps 0.2] [--trials 20000]
"""

import argparse
import sys

from gaplab import RngSeed
from gaplab.mc_harness import (
    in_theorem_regime,
    ks_statistics_experiment,
    lower_bound_experiment,
    lower_bound_m,
)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1 << 17)
    ap.add_argument("--eps", type=float, default=0.2)
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=20250811)
    ap.add_argument("--threads", type=int, default=0)
    args = ap.parse_args()

    m = lower_bound_m(args.n, args.eps)
    print(f"n={args.n} eps={args.eps} -> m = {m}, "
          f"inside theorem regime: {in_theorem_regime(args.n, args.eps)}")

    for learner in ("bayes-posterior", "erm"):
        est = lower_bound_experiment(
            args.n, args.eps, learner, args.trials, RngSeed(args.seed),
            threads=args.threads,
        )
        verdict = "above" if est.lower > 1 / 16 else "NOT above"
        print(f"{learner:>15}: Pr[d > 1/16] = {est.estimate:.4f} "
              f"(99% CI low {est.lower:.4f}) -> {verdict} 1/16")

    summary = ks_statistics_experiment(
        args.n, args.eps, m, args.trials, RngSeed(args.seed + 1),
        threads=args.threads,
    )
    print(f"K quantiles (min/median/max): {summary.k_quantiles[0]:.0f} / "
          f"{summary.k_quantiles[2]:.0f} / {summary.k_quantiles[4]:.0f}")
    print(f"Pr[S/K in [{summary.ratio_band[0]:.3f}, {summary.ratio_band[1]:.3f}]] "
          f"= {summary.ratio_in_band.estimate:.4f}")
    print(f"Pr[K >= n^(2/3)/2 = {summary.k_threshold:.0f}] "
          f"= {summary.k_tail.estimate:.4f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
