"""One-dimensional kernels, their CDFs, the smoothed indicator and product kernels.

All functions are vectorised over ``u`` and pure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, InvalidBandwidthError

_SQRT_2PI = np.sqrt(2.0 * np.pi)

FAMILIES = ("gaussian", "epanechnikov", "quartic_order4")
_ALIASES = {"quartic4": "quartic_order4", "normal": "gaussian", "epa": "epanechnikov"}


def _gaussian_pdf(u):
    return np.exp(-0.5 * u * u) / _SQRT_2PI


def _epanechnikov_pdf(u):
    return np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)


def _epanechnikov_cdf(u):
    v = np.clip(u, -1.0, 1.0)
    return 0.25 * (2.0 + 3.0 * v - v**3)


def _quartic_pdf(u):
    u2 = u * u
    return np.where(np.abs(u) <= 1.0, (15.0 / 32.0) * (3.0 - 10.0 * u2 + 7.0 * u2 * u2), 0.0)


def _quartic_cdf(u):
    v = np.clip(u, -1.0, 1.0)
    v2 = v * v
    inner = 0.5 + (15.0 / 32.0) * v * (3.0 - (10.0 / 3.0) * v2 + 1.4 * v2 * v2)
    return np.where(v <= -1.0, 0.0, np.where(v >= 1.0, 1.0, inner))


_PDF = {
    "gaussian": _gaussian_pdf,
    "epanechnikov": _epanechnikov_pdf,
    "quartic_order4": _quartic_pdf,
}
_CDF = {
    "gaussian": ndtr,
    "epanechnikov": _epanechnikov_cdf,
    "quartic_order4": _quartic_cdf,
}


@dataclass(frozen=True)
class KernelSpec:
    """A named kernel family.

    ``quartic_order4`` is ``(15/32)(3 - 10u^2 + 7u^4)`` on [-1, 1]. It has a
    vanishing second moment and is therefore negative for ``|u| > sqrt(3/7)``,
    so its CDF overshoots [0, 1] slightly near the support edges.
    """

    family: str = "gaussian"

    def __post_init__(self):
        fam = _ALIASES.get(self.family, self.family)
        if fam not in FAMILIES:
            raise ConfigError(f"unknown kernel family {self.family!r}")
        object.__setattr__(self, "family", fam)

    @property
    def compact(self) -> bool:
        return self.family != "gaussian"

    @property
    def support(self) -> tuple[float, float]:
        return (-1.0, 1.0) if self.compact else (-np.inf, np.inf)

    def density(self, u):
        return _PDF[self.family](np.asarray(u, dtype=float))

    def cdf(self, u):
        return _CDF[self.family](np.asarray(u, dtype=float))


@dataclass(frozen=True)
class KernelBundle:
    """Kernels used across the pipeline.

    k_smooth weights the local polynomial fit in x, omega smooths the response
    indicator, kappa drives the rearrangement, l_boot and n_boot enter the
    conditional distribution estimate of Z used by the bootstrap.
    """

    k_smooth: KernelSpec = field(default_factory=lambda: KernelSpec("gaussian"))
    omega: KernelSpec = field(default_factory=lambda: KernelSpec("quartic_order4"))
    kappa: KernelSpec = field(default_factory=lambda: KernelSpec("epanechnikov"))
    l_boot: KernelSpec = field(default_factory=lambda: KernelSpec("gaussian"))
    n_boot: KernelSpec = field(default_factory=lambda: KernelSpec("gaussian"))

    def __post_init__(self):
        if not self.kappa.compact:
            raise ConfigError("kappa must have compact support")
        grid = np.linspace(0.0, 1.5, 301)
        if not np.array_equal(self.kappa.density(grid), self.kappa.density(-grid)):
            raise ConfigError("kappa must be symmetric")


def eval_density(spec: KernelSpec, u):
    return spec.density(u)


def eval_cdf(spec: KernelSpec, u):
    return spec.cdf(u)


_OMEGA = KernelSpec("quartic_order4")


def omega_smoothed_indicator(v):
    """Smoothed version of ``I{v >= 0}``: the integral of the quartic kernel up to ``v``.

    Exact polynomial antiderivative; 0 for ``v <= -1`` and 1 for ``v >= 1``.
    """
    return _OMEGA.cdf(v)


def product_kernel(x_diff, h: float, multi_index=None, kernel: KernelSpec | None = None):
    """``prod_j K(x_j / h) * prod_j (x_j / h)^k_j``.

    ``x_diff`` may be ``(d,)`` or ``(..., d)``; the last axis is the coordinate axis.
    """
    if not h > 0:
        raise InvalidBandwidthError(f"bandwidth must be positive, got {h}")
    kernel = kernel or KernelSpec("gaussian")
    t = np.asarray(x_diff, dtype=float) / h
    out = np.prod(kernel.density(t), axis=-1)
    if multi_index is not None:
        k = np.asarray(multi_index)
        if np.any(k < 0):
            raise ConfigError("multi-index entries must be nonnegative")
        out = out * np.prod(t**k, axis=-1)
    return out
