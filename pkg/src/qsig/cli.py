"""Command-line front end: ``qsig test``, ``qsig simulate`` and ``qsig limit``.

Exit codes: 0 success (whatever the decision), 2 configuration error,
3 data error, 4 numerical failure of the estimator.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import logging
import math
import sys
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .asymptotics import kiefer_mueller_sup
from .cdf_estimator import Dataset
from .errors import ConfigError, DataError, EstimatorError
from .pipeline import TestSettings, run_test
from .simulation import Scenario, format_table, run_power_study

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4
MIN_N = 10
WARN_N = 20

log = logging.getLogger("qsig")


@dataclass
class RunConfig:
    data: str
    y_col: str
    x_cols: list
    z_cols: list
    tau: float = 0.5
    alpha: float = 0.05
    bootstrap: int = 300
    seed: int = 0
    bandwidth_h: Optional[float] = None
    format: str = "json"
    workers: int = 1
    trim_boundary: bool = False

    def validate(self):
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0,1)")
        if not 0 < self.tau < 1:
            raise ConfigError("tau must be in (0,1)")
        if self.bootstrap < 1:
            raise ConfigError("bootstrap must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.bandwidth_h is not None and not self.bandwidth_h > 0:
            raise ConfigError("bandwidth-h must be positive")
        if not self.x_cols or not self.z_cols:
            raise ConfigError("need at least one x column and one z column")
        roles = [self.y_col, *self.x_cols, *self.z_cols]
        if len(set(roles)) != len(roles):
            raise ConfigError("y, x and z columns must be distinct")


def load_csv(path: str, y_col: str, x_cols: list, z_cols: list) -> Dataset:
    """Read a headed, comma-separated file; every selected cell must be a finite number."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot open {path}: {exc.strerror}") from None
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path} is empty") from None
        cols = {}
        for name in [y_col, *x_cols, *z_cols]:
            if name not in header:
                raise ConfigError(f"column {name!r} not found in header of {path}")
            cols[name] = header.index(name)
        rows = {name: [] for name in cols}
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            for name, j in cols.items():
                cell = row[j].strip() if j < len(row) else ""
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"line {lineno}, column {name!r}: cannot parse {cell!r}") from None
                if not math.isfinite(v):
                    raise DataError(f"line {lineno}, column {name!r}: non-finite value {cell!r}")
                rows[name].append(v)
    n = len(rows[y_col])
    if n == 0:
        raise DataError(f"{path} has a header but no data rows")
    if n < WARN_N:
        warnings.warn(f"only {n} rows; results are unreliable below {WARN_N}", stacklevel=2)
    log.info("loaded %d rows: y=%s x=%s z=%s", n, y_col, x_cols, z_cols)
    return Dataset(
        y=np.array(rows[y_col]),
        x=np.column_stack([rows[c] for c in x_cols]),
        z=np.column_stack([rows[c] for c in z_cols]),
    )


def _emit(obj: dict, fmt: str, text: str) -> None:
    if fmt == "json":
        sys.stdout.write(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(text + "\n")


def _test_text(d: dict) -> str:
    bw = d["bandwidths"]
    lines = [
        f"K_n (sup |T~_n|)    {d['k_stat']:.6f}",
        f"bootstrap quantile  {d['boot_quantile']:.6f}  (1-alpha = {1 - d['alpha']:g}, {d['n_reps']} reps)",
        f"p-value             {d['p_value']:.4f}",
        f"decision            {'REJECT' if d['reject'] else 'do not reject'}: Z {'is' if d['reject'] else 'not shown to be'} significant at tau = {d['tau']:g}",
        f"tau_hat             {d['tau_hat']:.4f}",
        f"bandwidths          h={bw['h']:.4g} d={bw['d_smooth']:.4g} b={bw['b']:.4g} a={bw['a']:.4g} e={bw['e']:.4g}",
        f"argmax              x={d['argmax']['x']} z={d['argmax']['z']}",
        f"seed                {d['seed']}",
    ]
    if "k_original" in d:
        lines.append(f"K_n (trimmed T_n)   {d['k_original']:.6f}")
    return "\n".join(lines)


def cmd_test(cfg: RunConfig) -> int:
    cfg.validate()
    data = load_csv(cfg.data, cfg.y_col, cfg.x_cols, cfg.z_cols)
    if data.n < MIN_N:
        raise DataError(f"the test needs at least {MIN_N} rows, got {data.n}")
    settings = TestSettings(
        tau=cfg.tau, alpha=cfg.alpha, n_reps=cfg.bootstrap, seed=cfg.seed,
        h=cfg.bandwidth_h, trim_boundary=cfg.trim_boundary,
    )
    report = run_test(data, settings).to_dict()
    report["n"] = data.n
    _emit(report, cfg.format, _test_text(report))
    return EXIT_OK


def cmd_simulate(args) -> int:
    runs = 1000 if args.full_scale else args.runs
    hs = args.bandwidth_h or [None]
    for a in args.alpha:
        if not 0 < a < 1:
            raise ConfigError("alpha must be in (0,1)")
    scenarios = [
        Scenario.parse(s, tau=t, n=n, h=h)
        for s, t, n, h in itertools.product(args.scenario, args.tau, args.n, hs)
    ]
    table = run_power_study(
        scenarios, runs=runs, boot_reps=args.bootstrap, alphas=args.alpha, seed=args.seed, workers=args.workers
    )
    if args.format == "json":
        sys.stdout.write(table.to_json(include_timing=args.timing) + "\n")
    else:
        sys.stdout.write(format_table(table) + "\n")
    return EXIT_OK


def cmd_limit(args) -> int:
    if not 0 < args.tau < 1:
        raise ConfigError("tau must be in (0,1)")
    sample = kiefer_mueller_sup(grid_m=args.grid_m, n_paths=args.paths, tau=args.tau, seed=args.seed)
    d = sample.to_dict()
    text = "\n".join(f"q{p:<6} {v:.6f}" for p, v in d["quantiles"].items())
    _emit(d, args.format, text)
    return EXIT_OK


def _csv_list(text: str) -> list:
    return [c.strip() for c in text.split(",") if c.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsig", description="Significance test for a covariate block in nonparametric quantile regression.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test whether Z is significant for the tau-quantile of Y given (X, Z)")
    t.add_argument("--data", required=True)
    t.add_argument("--y-col", required=True)
    t.add_argument("--x-cols", required=True, type=_csv_list)
    t.add_argument("--z-cols", required=True, type=_csv_list)
    t.add_argument("--tau", type=float, default=0.5)
    t.add_argument("--alpha", type=float, default=0.05)
    t.add_argument("--bootstrap", type=int, default=300)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--workers", type=int, default=1, help="accepted for symmetry; the test itself is single-process")
    t.add_argument("--bandwidth-h", type=float, default=None)
    t.add_argument("--trim-boundary", action="store_true", help="also report the uncentred statistic on the trimmed interior")
    t.add_argument("--format", choices=("json", "table"), default="json")

    s = sub.add_parser("simulate", help="Monte Carlo rejection rates for the simulation models")
    s.add_argument("--scenario", action="append", required=True, help='"k,l" location/scale pair, or q1 / q2 for two-dimensional Z; repeatable')
    s.add_argument("--tau", type=float, nargs="+", default=[0.5])
    s.add_argument("--n", type=int, nargs="+", default=[50])
    s.add_argument("--alpha", type=float, nargs="+", default=[0.025, 0.05, 0.1])
    s.add_argument("--runs", type=int, default=200)
    s.add_argument("--full-scale", action="store_true", help="1000 runs per cell")
    s.add_argument("--bootstrap", type=int, default=300)
    s.add_argument("--bandwidth-h", type=float, nargs="+", default=None)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--timing", action="store_true", help="include wall time in JSON (breaks byte-identical output)")
    s.add_argument("--format", choices=("json", "table"), default="json")

    lim = sub.add_parser("limit", help="quantiles of the simulated distribution-free limit")
    lim.add_argument("--tau", type=float, default=0.5)
    lim.add_argument("--paths", type=int, default=10_000)
    lim.add_argument("--grid-m", type=int, default=64)
    lim.add_argument("--seed", type=int, default=0)
    lim.add_argument("--format", choices=("json", "table"), default="json")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "test":
            cfg = RunConfig(
                data=args.data, y_col=args.y_col, x_cols=args.x_cols, z_cols=args.z_cols, tau=args.tau,
                alpha=args.alpha, bootstrap=args.bootstrap, seed=args.seed, bandwidth_h=args.bandwidth_h,
                format=args.format, workers=args.workers, trim_boundary=args.trim_boundary,
            )
            return cmd_test(cfg)
        if args.command == "simulate":
            return cmd_simulate(args)
        return cmd_limit(args)
    except ConfigError as exc:
        print(f"qsig: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"qsig: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimatorError as exc:
        print(f"qsig: estimation failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
