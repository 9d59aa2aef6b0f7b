"""Marked empirical processes and the Kolmogorov-Smirnov statistic.

The processes are step functions of ``(x, z)`` that only change at observed
thresholds, so their supremum over the whole space equals the maximum over the
sample-threshold grid built here.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .cdf_estimator import Dataset, EstimatorConfig
from .errors import ConfigError
from .rearrangement import GSpec, RearrangeConfig, quantile_curve

PRODUCT_GRID_MAX_N = 500
PRODUCT_GRID_MAX_SIZE = 250_000


@dataclass(frozen=True)
class QuantileFit:
    qhat: np.ndarray
    resid: np.ndarray
    tau_hat: float
    tau: float

    @property
    def marks(self) -> np.ndarray:
        """``I{resid <= 0}`` as floats."""
        return (self.resid <= 0).astype(float)


def fit_quantile_curve(data: Dataset, tau: float, cfg: EstimatorConfig, rcfg: RearrangeConfig, g: GSpec) -> QuantileFit:
    qhat = quantile_curve(data, data.x, [tau], cfg, rcfg, g)[:, 0]
    resid = data.y - qhat
    tau_hat = float(np.count_nonzero(resid <= 0)) / data.n
    return QuantileFit(qhat=qhat, resid=resid, tau_hat=tau_hat, tau=float(tau))


def _unique_rows(a: np.ndarray) -> np.ndarray:
    return np.unique(a, axis=0)


def threshold_grid(a: np.ndarray) -> np.ndarray:
    """Evaluation thresholds for one covariate block, shape ``(G, dim)``.

    One column: sorted unique values. Several columns: the coordinatewise
    product of unique values while that is exact and affordable, else the
    observed rows.
    """
    n, dim = a.shape
    if dim == 1:
        return np.unique(a[:, 0])[:, None]
    uniq = [np.unique(a[:, j]) for j in range(dim)]
    size = int(np.prod([len(u) for u in uniq]))
    if n <= PRODUCT_GRID_MAX_N and size <= PRODUCT_GRID_MAX_SIZE:
        mesh = np.meshgrid(*uniq, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)
    return _unique_rows(a)


def lower_indicator(a: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """``I{a_i <= t_l}`` coordinatewise, shape ``(n, G)`` as floats."""
    return np.all(a[:, None, :] <= thresholds[None, :, :], axis=-1).astype(float)


class XSweep:
    """Computes ``S[k, l] = sum_i I{X_i <= x_k} M[i, l]`` over the x-threshold grid.

    For scalar X this is a cumulative sum in X order (read off at the last
    member of each tie group); otherwise an explicit indicator product.
    """

    def __init__(self, x: np.ndarray, x_grid: Optional[np.ndarray] = None):
        self.x = x
        self.grid = threshold_grid(x) if x_grid is None else x_grid
        if x.shape[1] == 1 and x_grid is None:
            self.order = np.argsort(x[:, 0], kind="stable")
            xs = x[self.order, 0]
            self.ends = np.flatnonzero(np.r_[xs[1:] != xs[:-1], True])
            self.ind = None
        else:
            self.order = None
            self.ind = lower_indicator(x, self.grid).T  # (Gx, n)

    def __call__(self, M: np.ndarray) -> np.ndarray:
        """``M`` is ``(n, Gz)`` or ``(R, n, Gz)``; returns ``(Gx, Gz)`` or ``(R, Gx, Gz)``."""
        if self.ind is None:
            sorted_m = np.take(M, self.order, axis=-2)
            return np.take(np.cumsum(sorted_m, axis=-2), self.ends, axis=-2)
        return np.matmul(self.ind, M)


@dataclass(frozen=True)
class ProcessSurface:
    values: np.ndarray
    x_grid: np.ndarray
    z_grid: np.ndarray

    @property
    def sup_abs(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    @property
    def argmax(self) -> tuple[int, int]:
        k, l = np.unravel_index(int(np.argmax(np.abs(self.values))), self.values.shape)
        return int(k), int(l)

    @property
    def argmax_location(self) -> dict:
        k, l = self.argmax
        return {"x": self.x_grid[k].tolist(), "z": self.z_grid[l].tolist()}


def empirical_cdf_on(z: np.ndarray, z_grid: np.ndarray) -> np.ndarray:
    return lower_indicator(z, z_grid).mean(axis=0)


def t_tilde_surface(data: Dataset, fit: QuantileFit, sweep: Optional[XSweep] = None) -> ProcessSurface:
    """The centred process with empirical ``tau_hat`` and the ``F_Z`` correction; its sup is the test statistic."""
    sweep = sweep or XSweep(data.x)
    z_grid = threshold_grid(data.z)
    iz = lower_indicator(data.z, z_grid)
    centred = iz - iz.mean(axis=0)
    m = fit.marks - fit.tau_hat
    values = sweep(m[:, None] * centred) / data.n
    return ProcessSurface(values=values, x_grid=sweep.grid, z_grid=z_grid)


@dataclass(frozen=True)
class RegionSpec:
    """Index sets for the uncentred process.

    ``lower_rectangle``: all sets ``{X <= t}`` with ``t`` on the threshold grid.
    ``interval_box``: the single box ``{lower <= X <= upper}``.
    With ``trim_boundary`` observations within ``h`` of the support edge are
    dropped; the support is ``support`` if given, else the sample range.
    """

    kind: str = "lower_rectangle"
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    trim_boundary: bool = False
    support: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("lower_rectangle", "interval_box"):
            raise ConfigError(f"unknown region kind {self.kind!r}")
        if self.kind == "interval_box":
            if self.lower is None or self.upper is None:
                raise ConfigError("interval_box needs lower and upper bounds")
            if np.any(np.asarray(self.lower) > np.asarray(self.upper)):
                raise ConfigError("interval_box needs lower <= upper componentwise")


def interior_mask(x: np.ndarray, h: float, support=None) -> np.ndarray:
    """Observations whose ``h``-cube lies inside the (estimated) support."""
    lo, hi = (x.min(axis=0), x.max(axis=0)) if support is None else map(np.asarray, support)
    return np.all((x - h >= lo) & (x + h <= hi), axis=1)


def t_original_surface(data: Dataset, fit: QuantileFit, region: RegionSpec, h: Optional[float] = None) -> ProcessSurface:
    """Uncentred process with nominal ``tau``, restricted to the region (and trimmed interior)."""
    z_grid = threshold_grid(data.z)
    iz = lower_indicator(data.z, z_grid)
    m = fit.marks - fit.tau
    if region.trim_boundary:
        if h is None:
            raise ConfigError("boundary trimming needs the bandwidth h")
        m = m * interior_mask(data.x, h, region.support)
    if region.kind == "lower_rectangle":
        sweep = XSweep(data.x)
        values = sweep(m[:, None] * iz) / data.n
        return ProcessSurface(values=values, x_grid=sweep.grid, z_grid=z_grid)
    lo = np.asarray(region.lower, dtype=float).reshape(-1)
    hi = np.asarray(region.upper, dtype=float).reshape(-1)
    inside = np.all((data.x >= lo) & (data.x <= hi), axis=1)
    values = ((m * inside) @ iz)[None, :] / data.n
    return ProcessSurface(values=values, x_grid=hi[None, :], z_grid=z_grid)
