"""Simulation of the distribution-free limit for independent scalar covariates.

The limit of ``sqrt(n) * sup |T_n|`` is ``sqrt(tau(1-tau)) * sup |B|`` where ``B`` is
the Kiefer-Mueller process on [0,1]^2, covariance ``(s1^s2)(t1^t2 - t1 t2)``.
On the grid ``{0, 1/m, ..., 1}^2`` ``B(s_i, .)`` is a sum of ``i`` independent
Brownian bridges scaled by ``1/sqrt(m)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .rng import stream

_CHUNK_PATHS = 1000


@dataclass
class LimitSample:
    draws: np.ndarray
    grid_m: int
    tau: float

    def quantiles(self, probs=(0.5, 0.9, 0.95, 0.975, 0.99)) -> dict:
        return {float(p): float(np.quantile(self.draws, p)) for p in probs}

    def to_dict(self, probs=(0.5, 0.9, 0.95, 0.975, 0.99)) -> dict:
        return {
            "tau": self.tau,
            "grid_m": self.grid_m,
            "n_paths": int(len(self.draws)),
            "quantiles": {f"{p:g}": v for p, v in self.quantiles(probs).items()},
        }


def grid_nodes(grid_m: int) -> np.ndarray:
    """Grid coordinates ``j/m``, ``j = 0..m`` (the same for s and t)."""
    return np.arange(grid_m + 1) / grid_m


def _brownian_bridges(rng: np.random.Generator, m: int) -> np.ndarray:
    # m bridges on t = 0..1, from random walks pinned at t = 1
    t = grid_nodes(m)
    w = np.zeros((m, m + 1))
    w[:, 1:] = np.cumsum(rng.standard_normal((m, m)) / np.sqrt(m), axis=1)
    return w - t[None, :] * w[:, -1:]


def kiefer_mueller_path(grid_m: int, seed: int, path: int) -> np.ndarray:
    """One path of ``B`` on the grid, shape ``(m+1, m+1)`` indexed ``[s, t]``."""
    out = np.zeros((grid_m + 1, grid_m + 1))
    out[1:] = np.cumsum(_brownian_bridges(stream(seed, path), grid_m), axis=0) / np.sqrt(grid_m)
    return out


def kiefer_mueller_field(grid_m: int, n_paths: int, seed: int) -> np.ndarray:
    """Paths ``0..n_paths-1`` stacked into ``(n_paths, m+1, m+1)``."""
    if grid_m < 2 or n_paths < 1:
        raise ConfigError("need grid_m >= 2 and n_paths >= 1")
    return np.stack([kiefer_mueller_path(grid_m, seed, p) for p in range(n_paths)])


def kiefer_mueller_sup(grid_m: int = 64, n_paths: int = 10_000, tau: float = 0.5, seed: int = 0) -> LimitSample:
    if grid_m < 2 or n_paths < 1:
        raise ConfigError("need grid_m >= 2 and n_paths >= 1")
    if not 0 < tau < 1:
        raise ConfigError("tau must be in (0,1)")
    sups = np.empty(n_paths)
    for start in range(0, n_paths, _CHUNK_PATHS):
        stop = min(n_paths, start + _CHUNK_PATHS)
        block = np.stack([kiefer_mueller_path(grid_m, seed, p) for p in range(start, stop)])
        sups[start:stop] = np.abs(block).reshape(stop - start, -1).max(axis=1)
    return LimitSample(draws=np.sqrt(tau * (1 - tau)) * sups, grid_m=grid_m, tau=tau)
