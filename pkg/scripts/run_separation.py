#!/usr/bin/env python3
"""Reproduce the labeled-sample separation curve and print a small text plot.

The cover learner (which is handed the distribution) needs a flat number of
examples across n, while distribution-independent learners pay an extra
factor that grows with log n.

Usage:
  python scripts/run_separation.py [--quick] [--seed 123] [--out separation.csv]
"""

import argparse
import csv
import sys
from pathlib import Path

from gaplab import PneFamily, ProjectionClass, RngSeed
from gaplab.mc_harness import RandomPair, TrialConfig, sample_complexity_search


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--quick", action="store_true",
                    help="n up to 2^10 with fewer trials (about a minute)")
    ap.add_argument("--seed", type=int, default=20250811)
    ap.add_argument("--trials", type=int, default=None)
    ap.add_argument("--threads", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("separation.csv"))
    args = ap.parse_args()

    exps = range(4, 11) if args.quick else range(4, 17)
    trials = args.trials or (1500 if args.quick else 4000)
    delta = eps_acc = 1.0 / 16.0
    eps = 0.1
    learners = ["erm", "cover"]
    base = RngSeed(args.seed)

    rows = []
    for k in exps:
        n = 2**k
        for li, learner in enumerate(learners):
            cfg = TrialConfig(
                concept_class=ProjectionClass(n),
                dist=PneFamily(n, eps),
                target=RandomPair(),
                learner=learner,
                m=1,
                eps_acc=eps_acc,
                trials=trials,
                seed=base.substream(n).substream(li),
            )
            res = sample_complexity_search(cfg, delta, 4096, threads=args.threads)
            rows.append({"n": n, "learner": learner, "m_star": res.m_star})
            print(f"n=2^{k:<2} {learner:>6}: m* = {res.m_star}", flush=True)

    with args.out.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "learner", "m_star"], lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    print(f"\nwrote {args.out}")

    print("\nm* by log2(n)  (e = erm, c = cover)")
    top = max(r["m_star"] for r in rows)
    for r in rows:
        mark = "e" if r["learner"] == "erm" else "c"
        bar = mark * r["m_star"]
        print(f"2^{r['n'].bit_length() - 1:<3} {mark} |{bar:<{top}}| {r['m_star']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
