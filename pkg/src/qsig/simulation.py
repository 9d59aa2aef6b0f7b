"""Location-scale simulation models and the Monte Carlo rejection-rate harness."""

from __future__ import annotations

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.special import ndtri

from .bootstrap import decisions_at
from .cdf_estimator import Dataset
from .errors import ConfigError, QsigError
from .pipeline import TestSettings, run_test
from .rng import derive_seed, stable_id, stream

log = logging.getLogger(__name__)

FAIL_FLAG_FRACTION = 0.01


def _loc(j, x, z):
    if j == 1:
        return np.exp(2 * x**2)
    if j == 2:
        return (x - 0.5) ** 2
    if j == 3:
        return np.exp(2 * x**2) * z[..., 0] ** 2
    if j == 4:
        return np.sin(2 * np.pi * (x + z[..., 0]))
    if j == "q1_2d":
        return x + 0.0 * z[..., 0]
    if j == "q2_2d":
        return z[..., 1] * x + z[..., 0] ** 2
    raise ConfigError(f"unknown location function {j!r}")


def _scale(k, x, z):
    if k == 1:
        return 0.5 * (x + 0.2)
    if k == 2:
        return 0.5 * (np.sin(x) + 1.2)
    if k == 3:
        return 0.5 * (z[..., 0] + 0.2)
    if k == 4:
        return 0.5 * np.sqrt((x + 0.2) * (z[..., 0] + 0.2))
    if k == "const":
        return 0.5 + 0.0 * x
    raise ConfigError(f"unknown scale function {k!r}")


@dataclass(frozen=True)
class Scenario:
    """One cell family of the simulation tables.

    ``loc`` is 1..4 (scalar Z) or ``"q1_2d"``/``"q2_2d"`` (two-dimensional Z with
    constant scale 0.5). ``h`` fixes the bandwidth instead of the data-driven rule.
    """

    loc: Union[int, str]
    scale: Union[int, str]
    tau: float = 0.5
    n: int = 50
    h: Optional[float] = None

    def __post_init__(self):
        two_d = self.loc in ("q1_2d", "q2_2d")
        if two_d and self.scale != "const":
            raise ConfigError("two-dimensional scenarios use the constant scale")
        if not two_d and (self.loc not in (1, 2, 3, 4) or self.scale not in (1, 2, 3, 4)):
            raise ConfigError(f"invalid scenario ({self.loc},{self.scale})")
        if self.n < 10:
            raise ConfigError("scenario sample size must be >= 10")
        if not 0 < self.tau < 1:
            raise ConfigError("tau must be in (0,1)")

    @property
    def q_dim(self) -> int:
        return 2 if self.loc in ("q1_2d", "q2_2d") else 1

    @property
    def label(self) -> str:
        if self.q_dim == 2:
            return self.loc.split("_")[0]
        return f"({self.loc},{self.scale})"

    @property
    def key(self) -> str:
        return f"{self.label}|tau={self.tau!r}|n={self.n}|h={self.h!r}"

    @classmethod
    def parse(cls, text: str, tau: float = 0.5, n: int = 50, h: Optional[float] = None) -> "Scenario":
        """``"3,2"``, ``"(3,2)"``, ``"q1_2d"`` or ``"q1"`` (two-dimensional)."""
        t = text.strip().strip("()").replace(" ", "")
        if t in ("q1", "q2", "q1_2d", "q2_2d"):
            return cls(loc=t[:2] + "_2d", scale="const", tau=tau, n=n, h=h)
        try:
            j, k = (int(v) for v in t.split(","))
        except ValueError:
            raise ConfigError(f"cannot parse scenario {text!r}") from None
        return cls(loc=j, scale=k, tau=tau, n=n, h=h)


def generate_dataset(sc: Scenario, rng: np.random.Generator) -> Dataset:
    x = rng.random(sc.n)
    z = rng.random((sc.n, sc.q_dim))
    eps = rng.standard_normal(sc.n)
    y = _loc(sc.loc, x, z) + _scale(sc.scale, x, z) * eps
    return Dataset(y=y, x=x, z=z)


def true_quantile(sc: Scenario, tau: float, x, z):
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if z.ndim == x.ndim:
        z = z[..., None]
    return _loc(sc.loc, x, z) + _scale(sc.scale, x, z) * ndtri(tau)


def is_null(sc: Scenario, tau: Optional[float] = None, grid: int = 21) -> bool:
    """True if the conditional quantile does not vary with z on a grid of [0,1]^(1+q)."""
    tau = sc.tau if tau is None else tau
    g = np.linspace(0.0, 1.0, grid)
    mesh = np.meshgrid(*([g] * (1 + sc.q_dim)), indexing="ij")
    x = mesh[0]
    z = np.stack(mesh[1:], axis=-1)
    vals = true_quantile(sc, tau, x, z).reshape(grid, -1)
    return bool(np.all(np.abs(vals - vals[:, :1]) <= 1e-12 * (1 + np.abs(vals[:, :1]))))


@dataclass
class RejectionRow:
    scenario: str
    tau: float
    n: int
    h: Optional[float]
    alpha: float
    rate: float
    runs: int
    failed: int
    se: float
    flagged: bool
    wall_time: float = 0.0


@dataclass
class RejectionTable:
    rows: list = field(default_factory=list)
    seed: int = 0
    boot_reps: int = 300

    def to_dict(self, include_timing: bool = False) -> dict:
        rows = []
        for r in self.rows:
            d = asdict(r)
            if not include_timing:
                d.pop("wall_time")
            rows.append(d)
        return {"seed": self.seed, "boot_reps": self.boot_reps, "rows": rows}

    @classmethod
    def from_dict(cls, d: dict) -> "RejectionTable":
        return cls(rows=[RejectionRow(**r) for r in d["rows"]], seed=d["seed"], boot_reps=d["boot_reps"])

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing), indent=2, sort_keys=True)

    def rate(self, scenario: str, alpha: float, n: Optional[int] = None, tau: Optional[float] = None, h=None) -> float:
        for r in self.rows:
            if r.scenario == scenario and r.alpha == alpha and n in (None, r.n) and tau in (None, r.tau) and (h is None or r.h == h):
                return r.rate
        raise KeyError((scenario, alpha, n, tau, h))


def format_table(table: RejectionTable) -> str:
    """Aligned text: one line per (tau, scenario, h), columns per (alpha, n)."""
    cols = sorted({(r.alpha, r.n) for r in table.rows})
    lines_key = []
    cells = {}
    for r in table.rows:
        k = (r.tau, r.scenario, r.h)
        if k not in cells:
            lines_key.append(k)
            cells[k] = {}
        cells[k][(r.alpha, r.n)] = r.rate if not r.flagged else f"{r.rate:.3f}*"
    head = f"{'tau':>5} {'(k,l)':>7} {'h':>5} | " + " ".join(f"a={a:<5g}n={n:<4d}" for a, n in cols)
    out = [head, "-" * len(head)]
    for k in lines_key:
        tau, sc, h = k
        vals = []
        for c in cols:
            v = cells[k].get(c, "")
            vals.append(f"{v:>13.3f}" if isinstance(v, float) else f"{v:>13}")
        out.append(f"{tau:>5g} {sc:>7} {'auto' if h is None else f'{h:g}':>5} | " + " ".join(vals))
    return "\n".join(out)


def _one_run(args):
    sc, run, seed, boot_reps, alphas, u_grid = args
    sid = stable_id(sc.key)
    data = generate_dataset(sc, stream(seed, sid, run, 0))
    settings = TestSettings(
        tau=sc.tau, alpha=alphas[0], n_reps=boot_reps, seed=derive_seed(seed, sid, run, 1), h=sc.h, u_grid=u_grid
    )
    try:
        rep = run_test(data, settings)
    except QsigError as exc:
        log.debug("run %d of %s failed: %s", run, sc.label, exc)
        return None
    return decisions_at(rep.outcome, alphas)


def run_power_study(
    scenarios: Sequence[Scenario],
    runs: int = 200,
    boot_reps: int = 300,
    alphas: Sequence[float] = (0.025, 0.05, 0.1),
    seed: int = 0,
    workers: int = 1,
    u_grid: int = 256,
) -> RejectionTable:
    """Simulated rejection rates; bit-for-bit reproducible for a given seed regardless of ``workers``."""
    if runs < 1:
        raise ConfigError("runs must be >= 1")
    if boot_reps < 1:
        raise ConfigError("boot_reps must be >= 1")
    alphas = tuple(float(a) for a in alphas)
    table = RejectionTable(seed=seed, boot_reps=boot_reps)
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for sc in scenarios:
            t0 = time.perf_counter()
            tasks = [(sc, r, seed, boot_reps, alphas, u_grid) for r in range(runs)]
            if pool is None:
                results = [_one_run(t) for t in tasks]
            else:
                results = list(pool.map(_one_run, tasks, chunksize=max(1, runs // (4 * workers))))
            wall = time.perf_counter() - t0
            ok = [r for r in results if r is not None]
            failed = runs - len(ok)
            for a in alphas:
                m = len(ok)
                rate = sum(r[a] for r in ok) / m if m else float("nan")
                se = math.sqrt(rate * (1 - rate) / m) if m else float("nan")
                table.rows.append(
                    RejectionRow(
                        scenario=sc.label, tau=sc.tau, n=sc.n, h=sc.h, alpha=a, rate=rate, runs=m,
                        failed=failed, se=se, flagged=failed > FAIL_FLAG_FRACTION * runs, wall_time=wall,
                    )
                )
            log.info("%s tau=%g n=%d: %d runs in %.1fs", sc.label, sc.tau, sc.n, runs, wall)
    finally:
        if pool is not None:
            pool.shutdown()
    return table


# Published reference rejection rates (1000 runs x 300 bootstrap replications).
# Size/power rows hold (a=.025 n=50, n=100, a=.05 n=50, n=100, a=.1 n=50, n=100);
# the fixed-bandwidth rows are n=50, a=.05 over REF_BANDWIDTH_H.
REF_SIZE = {
    (0.5, "(1,1)"): (0.037, 0.035, 0.053, 0.061, 0.102, 0.111),
    (0.5, "(1,2)"): (0.026, 0.025, 0.044, 0.048, 0.090, 0.101),
    (0.5, "(1,3)"): (0.041, 0.027, 0.069, 0.066, 0.132, 0.127),
    (0.5, "(1,4)"): (0.040, 0.033, 0.060, 0.059, 0.120, 0.121),
    (0.5, "(2,1)"): (0.036, 0.031, 0.068, 0.057, 0.122, 0.106),
    (0.5, "(2,2)"): (0.024, 0.028, 0.051, 0.046, 0.092, 0.085),
    (0.5, "(2,3)"): (0.037, 0.025, 0.057, 0.059, 0.132, 0.114),
    (0.5, "(2,4)"): (0.027, 0.024, 0.050, 0.047, 0.109, 0.093),
    (0.25, "(1,1)"): (0.024, 0.019, 0.044, 0.035, 0.089, 0.082),
    (0.25, "(1,2)"): (0.024, 0.019, 0.044, 0.037, 0.089, 0.092),
    (0.25, "(2,1)"): (0.027, 0.025, 0.047, 0.052, 0.102, 0.105),
    (0.25, "(2,2)"): (0.016, 0.022, 0.036, 0.048, 0.089, 0.101),
}
REF_POWER = {
    (0.5, "(3,1)"): (0.999, 1.000, 1.000, 1.000, 1.000, 1.000),
    (0.5, "(3,2)"): (0.756, 0.983, 0.815, 0.989, 0.886, 0.997),
    (0.5, "(3,3)"): (0.997, 1.000, 0.999, 1.000, 0.999, 1.000),
    (0.5, "(3,4)"): (1.000, 1.000, 1.000, 1.000, 1.000, 1.000),
    (0.5, "(4,1)"): (0.082, 0.197, 0.142, 0.311, 0.252, 0.519),
    (0.5, "(4,2)"): (0.034, 0.070, 0.067, 0.119, 0.138, 0.237),
    (0.5, "(4,3)"): (0.089, 0.176, 0.134, 0.279, 0.226, 0.488),
    (0.5, "(4,4)"): (0.070, 0.203, 0.123, 0.321, 0.218, 0.508),
    (0.25, "(1,3)"): (0.099, 0.240, 0.163, 0.325, 0.245, 0.459),
    (0.25, "(1,4)"): (0.044, 0.078, 0.086, 0.133, 0.155, 0.225),
    (0.25, "(2,3)"): (0.139, 0.295, 0.204, 0.405, 0.332, 0.540),
    (0.25, "(2,4)"): (0.06, 0.089, 0.106, 0.152, 0.176, 0.232),
    (0.25, "(3,1)"): (0.935, 1.000, 0.971, 1.000, 0.988, 1.000),
    (0.25, "(3,2)"): (0.464, 0.857, 0.591, 0.913, 0.725, 0.954),
    (0.25, "(3,3)"): (0.792, 0.990, 0.873, 0.996, 0.934, 0.999),
    (0.25, "(3,4)"): (0.900, 1.000, 0.948, 1.000, 0.975, 1.000),
    (0.25, "(4,1)"): (0.027, 0.054, 0.055, 0.103, 0.111, 0.229),
    (0.25, "(4,2)"): (0.019, 0.031, 0.034, 0.061, 0.078, 0.132),
    (0.25, "(4,3)"): (0.022, 0.051, 0.043, 0.091, 0.104, 0.176),
    (0.25, "(4,4)"): (0.021, 0.054, 0.053, 0.093, 0.104, 0.195),
}
REF_BANDWIDTH_H = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50)
REF_BANDWIDTH = {
    (0.5, "(1,2)"): (0.037, 0.036, 0.037, 0.037, 0.047, 0.054, 0.061, 0.046, 0.047, 0.043),
    (0.5, "(3,2)"): (0.238, 0.301, 0.361, 0.389, 0.388, 0.385, 0.381, 0.389, 0.412, 0.404),
    (0.25, "(1,2)"): (0.017, 0.031, 0.037, 0.033, 0.031, 0.048, 0.042, 0.049, 0.041, 0.053),
    (0.25, "(3,2)"): (0.113, 0.160, 0.210, 0.210, 0.237, 0.250, 0.262, 0.246, 0.262, 0.260),
}
REF_2D = {"q1": (0.026, 0.042, 0.096), "q2": (0.998, 1.000, 1.000)}
ALPHAS = (0.025, 0.05, 0.1)


def reference_rate(tau: float, label: str, n: int, alpha: float, h: Optional[float] = None) -> Optional[float]:
    """Reference rejection rate for a cell, or None when no reference exists."""
    if label in REF_2D:
        return REF_2D[label][ALPHAS.index(alpha)] if n == 50 and h is None else None
    if h is not None:
        row = REF_BANDWIDTH.get((tau, label))
        if row is None or n != 50 or alpha != 0.05:
            return None
        for hh, v in zip(REF_BANDWIDTH_H, row):
            if abs(hh - h) < 1e-9:
                return v
        return None
    row = REF_SIZE.get((tau, label)) or REF_POWER.get((tau, label))
    if row is None or n not in (50, 100) or alpha not in ALPHAS:
        return None
    return row[2 * ALPHAS.index(alpha) + (n == 100)]
