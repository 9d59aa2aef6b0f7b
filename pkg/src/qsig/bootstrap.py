"""Process-based wild bootstrap calibration of the KS statistic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bandwidth import BandwidthSet
from .cdf_estimator import Dataset
from .errors import ConfigError, EmptyWindowError
from .kernels import KernelBundle
from .process import QuantileFit, XSweep, lower_indicator, t_tilde_surface
from .rng import stream

_CHUNK_ELEMENTS = 4_000_000


@dataclass(frozen=True)
class BootstrapConfig:
    bandwidths: BandwidthSet
    n_reps: int = 300
    alpha: float = 0.05
    seed: int = 0
    kernels: KernelBundle = field(default_factory=KernelBundle)

    def __post_init__(self):
        if self.n_reps < 1:
            raise ConfigError("n_reps must be >= 1")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must be in (0,1)")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")


@dataclass
class TestOutcome:
    k_stat: float
    boot_quantile: float
    p_value: float
    reject: bool
    boot_draws: np.ndarray
    argmax: dict
    alpha: float
    n_reps: int
    seed: int

    __test__ = False  # not a pytest class

    def to_dict(self, draws: bool = False) -> dict:
        out = {
            "k_stat": self.k_stat,
            "boot_quantile": self.boot_quantile,
            "p_value": self.p_value,
            "reject": self.reject,
            "argmax": self.argmax,
            "alpha": self.alpha,
            "n_reps": self.n_reps,
            "seed": self.seed,
        }
        if draws:
            out["boot_draws"] = self.boot_draws.tolist()
        return out


def conditional_weights(data: Dataset, fit: QuantileFit, x_points, bw: BandwidthSet, kernels: KernelBundle, y: float = 0.0) -> np.ndarray:
    """Row-normalised weights ``L((X_j - x)/a) N((eps_j - y)/e)``, shape ``(len(x_points), n)``."""
    x_points = np.atleast_2d(np.asarray(x_points, dtype=float))
    lx = np.prod(kernels.l_boot.density((data.x[None, :, :] - x_points[:, None, :]) / bw.a), axis=-1)
    ne = kernels.n_boot.density((fit.resid - y) / bw.e)
    w = lx * ne[None, :]
    tot = w.sum(axis=1)
    if np.any(~(tot > 0)):
        raise EmptyWindowError("conditional distribution of Z has an empty kernel window")
    return w / tot[:, None]


def cond_dist_z(data: Dataset, fit: QuantileFit, z, x, bw: BandwidthSet, kernels: Optional[KernelBundle] = None, y: float = 0.0) -> float:
    """Kernel estimate of ``P(Z <= z | X = x, eps = y)``; the bootstrap uses ``y = 0``."""
    kernels = kernels or KernelBundle()
    z = np.asarray(z, dtype=float).reshape(1, -1)
    w = conditional_weights(data, fit, np.asarray(x, dtype=float).reshape(1, -1), bw, kernels, y)[0]
    return float(w @ lower_indicator(data.z, z)[:, 0])


def centred_indicators(data: Dataset, fit: QuantileFit, z_grid: np.ndarray, bw: BandwidthSet, kernels: KernelBundle) -> np.ndarray:
    """``C[i, l] = I{Z_i <= z_l} - F_hat(z_l | X_i, 0)``; fixed across replicates."""
    iz = lower_indicator(data.z, z_grid)
    w = conditional_weights(data, fit, data.x, bw, kernels)
    return iz - w @ iz


def bootstrap_multipliers(tau_hat: float, n: int, seed: int, rep: int) -> np.ndarray:
    """``B_i - tau_hat`` with ``B_i`` Bernoulli(tau_hat), drawn from ``stream(seed, rep)``."""
    return (stream(seed, rep).random(n) < tau_hat).astype(float) - tau_hat


def bootstrap_surfaces(C: np.ndarray, mult: np.ndarray, sweep: XSweep) -> np.ndarray:
    """Bootstrap process on the threshold grid for multiplier rows ``mult`` (R, n); shape ``(R, Gx, Gz)``."""
    return sweep(mult[:, :, None] * C[None, :, :]) / C.shape[0]


def bootstrap_sups(C: np.ndarray, tau_hat: float, sweep: XSweep, n_reps: int, seed: int) -> np.ndarray:
    """Sup-norms of the bootstrap process for replicates ``0..n_reps-1``.

    Replicate ``r`` draws its Bernoulli(tau_hat) multipliers from ``stream(seed, r)``.
    """
    n, gz = C.shape
    gx = len(sweep.grid)
    chunk = max(1, _CHUNK_ELEMENTS // max(1, n * max(gz, gx)))
    out = np.empty(n_reps)
    for start in range(0, n_reps, chunk):
        reps = range(start, min(n_reps, start + chunk))
        mult = np.stack([bootstrap_multipliers(tau_hat, n, seed, r) for r in reps])
        surf = bootstrap_surfaces(C, mult, sweep)
        out[start : start + len(reps)] = np.abs(surf).reshape(len(reps), -1).max(axis=1)
    return out


def order_stat_quantile(draws: np.ndarray, alpha: float) -> float:
    """The ``ceil((1 - alpha) R)``-th smallest draw."""
    r = len(draws)
    k = min(r, max(1, math.ceil((1.0 - alpha) * r - 1e-9)))
    return float(np.sort(draws)[k - 1])


def bootstrap_ks(data: Dataset, fit: QuantileFit, cfg: BootstrapConfig) -> TestOutcome:
    sweep = XSweep(data.x)
    surface = t_tilde_surface(data, fit, sweep)
    k_stat = surface.sup_abs
    C = centred_indicators(data, fit, surface.z_grid, cfg.bandwidths, cfg.kernels)
    draws = bootstrap_sups(C, fit.tau_hat, sweep, cfg.n_reps, cfg.seed)
    q = order_stat_quantile(draws, cfg.alpha)
    p = (1.0 + np.count_nonzero(draws >= k_stat)) / (1.0 + cfg.n_reps)
    return TestOutcome(
        k_stat=k_stat,
        boot_quantile=q,
        p_value=float(p),
        reject=bool(k_stat > q),
        boot_draws=draws,
        argmax=surface.argmax_location,
        alpha=cfg.alpha,
        n_reps=cfg.n_reps,
        seed=cfg.seed,
    )


def decisions_at(outcome: TestOutcome, alphas) -> dict:
    """Reject/accept at several levels from one set of bootstrap draws."""
    return {a: bool(outcome.k_stat > order_stat_quantile(outcome.boot_draws, a)) for a in alphas}
