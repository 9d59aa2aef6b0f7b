"""Smoothed local polynomial estimator of the conditional distribution of Y given X.

For a point ``x`` the estimator is a weighted least-squares fit of the smoothed
indicators ``Omega((y - Y_i) / d_n)`` on monomials of ``(x - X_i)``; the
intercept is the CDF estimate. The fit is linear in the responses, so we
compute the *equivalent weights* ``l_i(x)`` once per ``x`` and reuse them for
every ``y``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError, EmptyWindowError, InvalidBandwidthError, SingularDesignError
from .kernels import KernelBundle, omega_smoothed_indicator

log = logging.getLogger(__name__)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class Dataset:
    """Observed triples ``(Y_i, X_i, Z_i)``; ``x`` is ``(n, d)`` and ``z`` is ``(n, q)``."""

    y: np.ndarray
    x: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float).reshape(-1)
        x = np.asarray(self.x, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        if z.ndim == 1:
            z = z[:, None]
        if x.ndim != 2 or z.ndim != 2:
            raise DataError("x and z must be 1-D or 2-D arrays")
        if not (len(y) == len(x) == len(z)):
            raise DataError(f"inconsistent sample sizes: y={len(y)}, x={len(x)}, z={len(z)}")
        if len(y) < 2:
            raise DataError("need at least two observations")
        if x.shape[1] < 1 or z.shape[1] < 1:
            raise DataError("x and z need at least one column each")
        for name, arr in (("y", y), ("x", x), ("z", z)):
            if not np.all(np.isfinite(arr)):
                raise DataError(f"non-finite entries in {name}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def q(self) -> int:
        return self.z.shape[1]


@dataclass(frozen=True)
class EstimatorConfig:
    """Settings of the local polynomial CDF estimator.

    ``ridge_eps`` is relative: the ridge added to a near-singular normal matrix
    is ``ridge_eps * trace``.
    """

    h: float
    d_smooth: float
    p: int = 2
    kernels: KernelBundle = field(default_factory=KernelBundle)
    ridge_eps: float = 1e-9

    def __post_init__(self):
        if self.p < 0:
            raise ConfigError("polynomial order p must be >= 0")
        if not self.h > 0 or not self.d_smooth > 0:
            raise InvalidBandwidthError(f"bandwidths must be positive (h={self.h}, d={self.d_smooth})")
        if self.ridge_eps < 0:
            raise ConfigError("ridge_eps must be >= 0")


def monomial_basis(d: int, p: int) -> list[tuple[int, ...]]:
    """Multi-indices of total degree <= p, by degree then descending lexicographic order."""
    if d < 1 or p < 0:
        raise ConfigError("need d >= 1 and p >= 0")
    out = []
    for deg in range(p + 1):
        same = [k for k in itertools.product(range(deg + 1), repeat=d) if sum(k) == deg]
        out.extend(sorted(same, reverse=True))
    return out


def _intercept_solve(A: np.ndarray, ridge_eps: float):
    """Return ``A^{-1} e_1`` per batch row, or NaN rows where the design is unusable."""
    lam, V = np.linalg.eigh(A)
    lo, hi = lam[:, 0], lam[:, -1]
    bad = ~(lo > 0) | (hi > COND_LIMIT * lo)
    if np.any(bad) and ridge_eps > 0:
        Ab = A[bad].copy()
        tr = np.trace(Ab, axis1=1, axis2=2)
        Ab += (ridge_eps * tr)[:, None, None] * np.eye(A.shape[1])
        lam_b, V_b = np.linalg.eigh(Ab)
        lam[bad], V[bad] = lam_b, V_b
        lo = lam[:, 0]
        bad = ~(lo > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        c = np.einsum("bij,bj,bj->bi", V, 1.0 / lam, V[:, 0, :])
    bad |= ~np.all(np.isfinite(c), axis=1)
    c[bad] = np.nan
    return c, bad


def equivalent_weights(data_x: np.ndarray, xs: np.ndarray, cfg: EstimatorConfig) -> np.ndarray:
    """Equivalent kernel weights ``l_i(x)`` for each evaluation point.

    ``data_x`` is ``(n, d)``, ``xs`` is ``(m, d)``; returns ``(m, n)`` with
    ``F_hat(y | xs[k]) = sum_i l[k, i] * Omega((y - Y_i) / d_n)`` before clamping.
    Monomials are taken in the scaled coordinates ``(x - X_i) / h``, which leaves
    the intercept unchanged and keeps the normal matrix well conditioned.
    """
    data_x = np.asarray(data_x, dtype=float)
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n, d = data_x.shape
    if xs.shape[1] != d:
        raise DataError(f"evaluation points have dimension {xs.shape[1]}, data has {d}")
    h = cfg.h
    t = (xs[:, None, :] - data_x[None, :, :]) / h
    w = np.prod(cfg.kernels.k_smooth.density(t), axis=-1) / (n * h**d)
    wsum = w.sum(axis=1)
    if np.any(~(wsum > 0)):
        raise EmptyWindowError("no sample point receives positive kernel weight")

    if cfg.p == 0:
        return w / wsum[:, None]

    basis = monomial_basis(d, cfg.p)
    B = np.stack([np.prod(t ** np.array(k), axis=-1) for k in basis], axis=-1)
    A = np.einsum("mn,mni,mnj->mij", w, B, B)
    c, bad = _intercept_solve(A, cfg.ridge_eps)
    L = w * np.einsum("mni,mi->mn", B, np.nan_to_num(c))
    if np.any(bad):
        log.debug("local-constant fallback at %d of %d points", int(bad.sum()), len(bad))
        L[bad] = w[bad] / wsum[bad, None]
    if not np.all(np.isfinite(L)):
        raise SingularDesignError("non-finite equivalent weights")
    return L


def smoothed_responses(y_data: np.ndarray, y_values, d_smooth: float) -> np.ndarray:
    """``Omega((y_j - Y_i) / d_n)`` as an ``(m, n)`` matrix."""
    y_values = np.asarray(y_values, dtype=float).reshape(-1)
    return omega_smoothed_indicator((y_values[:, None] - y_data[None, :]) / d_smooth)


def estimate_cdf_profile(data: Dataset, x, y_values, cfg: EstimatorConfig) -> np.ndarray:
    """CDF estimate at one ``x`` for several ``y``; values clamped to [0, 1]."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    l = equivalent_weights(data.x, x, cfg)[0]
    om = smoothed_responses(data.y, y_values, cfg.d_smooth)
    return np.clip((om * l).sum(axis=1), 0.0, 1.0)


def estimate_cdf(data: Dataset, x, y: float, cfg: EstimatorConfig) -> float:
    return float(estimate_cdf_profile(data, x, [y], cfg)[0])


def estimate_cdf_surface(data: Dataset, xs, y_values, cfg: EstimatorConfig) -> np.ndarray:
    """Clamped CDF estimates on the grid ``xs x y_values``; shape ``(len(xs), len(y_values))``."""
    L = equivalent_weights(data.x, xs, cfg)
    om = smoothed_responses(data.y, y_values, cfg.d_smooth)
    return np.clip(L @ om.T, 0.0, 1.0)
