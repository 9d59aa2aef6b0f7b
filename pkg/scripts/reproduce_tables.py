#!/usr/bin/env python3
"""Simulated rejection rates for the size, power, bandwidth and two-dimensional studies.

Each study is printed as an aligned table with the published reference rate
next to the simulated one. Desk scale is 200 runs per cell; pass --runs 1000
for the full-scale study (slow on a single core).

    python scripts/reproduce_tables.py --study size --runs 200 --workers 8
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from qsig.simulation import (
    REF_2D,
    REF_BANDWIDTH,
    REF_BANDWIDTH_H,
    REF_POWER,
    REF_SIZE,
    Scenario,
    reference_rate,
    run_power_study,
)

ALPHAS = (0.025, 0.05, 0.1)


def _scenarios(study: str, ns, hs) -> list:
    if study == "size":
        return [Scenario.parse(lab, tau=tau, n=n) for (tau, lab) in REF_SIZE for n in ns]
    if study == "power":
        return [Scenario.parse(lab, tau=tau, n=n) for (tau, lab) in REF_POWER for n in ns]
    if study == "bandwidth":
        hs = hs or REF_BANDWIDTH_H
        return [Scenario.parse(lab, tau=tau, n=50, h=h) for (tau, lab) in REF_BANDWIDTH for h in hs]
    if study == "2d":
        return [Scenario.parse(lab, tau=0.5, n=50) for lab in REF_2D]
    raise ValueError(study)


def _print(table, runs: int) -> None:
    print(f"{'tau':>5} {'cell':>7} {'n':>4} {'h':>5} {'alpha':>6} {'rate':>7} {'ref':>7} {'3se':>6}")
    for r in table.rows:
        ref = reference_rate(r.tau, r.scenario, r.n, r.alpha, r.h)
        band = "" if ref is None else f"{3 * (ref * (1 - ref) / runs) ** 0.5:6.3f}"
        refs = "   -   " if ref is None else f"{ref:7.3f}"
        h = "auto" if r.h is None else f"{r.h:g}"
        flag = "*" if r.flagged else ""
        print(f"{r.tau:>5g} {r.scenario:>7} {r.n:>4} {h:>5} {r.alpha:>6g} {r.rate:7.3f}{flag} {refs} {band}")


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--study", choices=("size", "power", "bandwidth", "2d", "all"), default="size")
    p.add_argument("--runs", type=int, default=200)
    p.add_argument("--bootstrap", type=int, default=300)
    p.add_argument("--n", type=int, nargs="+", default=[50, 100])
    p.add_argument("--h", type=float, nargs="+", default=None, help="bandwidths for the bandwidth study")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--json", default=None, help="also write the raw table to this file")
    args = p.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    studies = ("size", "power", "bandwidth", "2d") if args.study == "all" else (args.study,)
    out = {}
    for study in studies:
        alphas = (0.05,) if study == "bandwidth" else ALPHAS
        table = run_power_study(
            _scenarios(study, args.n, args.h), runs=args.runs, boot_reps=args.bootstrap,
            alphas=alphas, seed=args.seed, workers=args.workers,
        )
        print(f"\n== {study} ({args.runs} runs, {args.bootstrap} bootstrap replications) ==")
        _print(table, args.runs)
        out[study] = table.to_dict()
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(out, fh, indent=2, sort_keys=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
