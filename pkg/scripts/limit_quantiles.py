#!/usr/bin/env python3
"""Quantiles of the distribution-free limit next to the bootstrap null distribution.

For independent scalar X and Z the scaled statistic sqrt(n) * K_n has the limit
sqrt(tau (1 - tau)) * sup |B|, B the Kiefer-Mueller sheet. This script prints
limit quantiles for a few grid sizes (to show the discretisation effect) and,
for comparison, quantiles of sqrt(n) * K_n over simulated null samples.
"""

from __future__ import annotations

import argparse

import numpy as np

from qsig.asymptotics import kiefer_mueller_sup
from qsig.pipeline import TestSettings, run_test
from qsig.rng import stream
from qsig.simulation import Scenario, generate_dataset

PROBS = (0.5, 0.9, 0.95, 0.99)


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--tau", type=float, default=0.5)
    p.add_argument("--paths", type=int, default=10_000)
    p.add_argument("--grids", type=int, nargs="+", default=[16, 32, 64])
    p.add_argument("--null-runs", type=int, default=200)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    head = f"{'source':<22}" + "".join(f"{'q' + format(q, 'g'):>9}" for q in PROBS)
    print(head)
    print("-" * len(head))
    for m in args.grids:
        s = kiefer_mueller_sup(grid_m=m, n_paths=args.paths, tau=args.tau, seed=args.seed)
        print(f"{f'limit, grid m={m}':<22}" + "".join(f"{np.quantile(s.draws, q):9.4f}" for q in PROBS))

    if args.null_runs > 0:
        sc = Scenario(1, 2, tau=args.tau, n=args.n)
        stats = []
        for r in range(args.null_runs):
            data = generate_dataset(sc, stream(args.seed, 17, r))
            rep = run_test(data, TestSettings(tau=args.tau, n_reps=1, seed=r))
            stats.append(np.sqrt(args.n) * rep.outcome.k_stat)
        label = f"sqrt(n) K_n, n={args.n}"
        print(f"{label:<22}" + "".join(f"{np.quantile(stats, q):9.4f}" for q in PROBS))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
