"""Rice difference-based variance estimate and the power-rule bandwidths."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cdf_estimator import Dataset
from .errors import InvalidBandwidthError, InvalidVarianceError, SampleTooSmallError

B_FLOOR = 1e-4
H_EXPONENT = 13.0 / 50.0


@dataclass(frozen=True)
class BandwidthSet:
    h: float
    d_smooth: float
    b: float
    a: float
    e: float

    def __post_init__(self):
        for name in ("h", "d_smooth", "b", "a", "e"):
            if not getattr(self, name) > 0:
                raise InvalidBandwidthError(f"bandwidth {name} must be positive")

    @classmethod
    def from_h(cls, h: float) -> "BandwidthSet":
        """``d = a = e = h`` and ``b = max(h^3, 1e-4)``."""
        return cls(h=h, d_smooth=h, b=max(h**3, B_FLOOR), a=h, e=h)

    def to_dict(self) -> dict:
        return {"h": self.h, "d_smooth": self.d_smooth, "b": self.b, "a": self.a, "e": self.e}


def _nearest_neighbour_path(x: np.ndarray) -> np.ndarray:
    # greedy tour: start at smallest first coordinate, always step to the closest unvisited point
    n = len(x)
    order = np.empty(n, dtype=int)
    visited = np.zeros(n, dtype=bool)
    cur = int(np.lexsort(x.T[::-1])[0])
    for k in range(n):
        order[k] = cur
        visited[cur] = True
        if k == n - 1:
            break
        dist = np.sum((x - x[cur]) ** 2, axis=1)
        dist[visited] = np.inf
        cur = int(np.argmin(dist))
    return order


def rice_variance(data: Dataset) -> float:
    """``sum (Y_(i+1) - Y_(i))^2 / (2(n-1))`` with observations ordered along X.

    For ``d = 1`` the order is by X with ties broken by Y; for ``d > 1`` a greedy
    nearest-neighbour path through the X points is used.
    """
    if data.n < 3:
        raise SampleTooSmallError("Rice variance needs n >= 3")
    if data.d == 1:
        order = np.lexsort((data.y, data.x[:, 0]))
    else:
        order = _nearest_neighbour_path(data.x)
    diffs = np.diff(data.y[order])
    return float(np.sum(diffs**2) / (2.0 * (data.n - 1)))


def default_bandwidths(sigma2: float, n: int) -> BandwidthSet:
    """``h = (sigma2 / (2 n))^(13/50)``; the other bandwidths follow from ``h``."""
    if not sigma2 > 0:
        raise InvalidVarianceError(f"variance estimate must be positive, got {sigma2}")
    if n < 3:
        raise SampleTooSmallError("need n >= 3")
    return BandwidthSet.from_h((sigma2 / (2.0 * n)) ** H_EXPONENT)
