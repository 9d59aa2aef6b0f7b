"""End-to-end significance test: reference G, bandwidths, quantile fit, KS statistic, bootstrap."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

from .bandwidth import BandwidthSet, default_bandwidths, rice_variance
from .bootstrap import BootstrapConfig, TestOutcome, bootstrap_ks
from .cdf_estimator import Dataset, EstimatorConfig
from .kernels import KernelBundle
from .process import QuantileFit, RegionSpec, fit_quantile_curve, t_original_surface
from .rearrangement import GSpec, RearrangeConfig, select_g

log = logging.getLogger(__name__)

B_CAP = 0.49


@dataclass(frozen=True)
class TestSettings:
    tau: float = 0.5
    alpha: float = 0.05
    n_reps: int = 300
    seed: int = 0
    h: Optional[float] = None
    p: int = 2
    u_grid: int = 256
    kernels: KernelBundle = field(default_factory=KernelBundle)
    trim_boundary: bool = False

    __test__ = False


@dataclass
class TestReport:
    outcome: TestOutcome
    fit: QuantileFit
    bandwidths: BandwidthSet
    g: GSpec
    k_original: Optional[float] = None

    __test__ = False

    def to_dict(self) -> dict:
        out = self.outcome.to_dict()
        out["tau_hat"] = self.fit.tau_hat
        out["tau"] = self.fit.tau
        out["bandwidths"] = self.bandwidths.to_dict()
        out["g"] = {"mu_g": self.g.mu_g, "sigma_g": self.g.sigma_g}
        if self.k_original is not None:
            out["k_original"] = self.k_original
        return out


def choose_bandwidths(data: Dataset, h: Optional[float] = None) -> BandwidthSet:
    if h is not None:
        return BandwidthSet.from_h(h)
    return default_bandwidths(rice_variance(data), data.n)


def build_configs(bw: BandwidthSet, settings: TestSettings) -> tuple[EstimatorConfig, RearrangeConfig]:
    b = bw.b
    if b >= B_CAP:
        log.warning("rearrangement bandwidth %.3g capped at %.2f", b, B_CAP)
        b = B_CAP
    cfg = EstimatorConfig(h=bw.h, d_smooth=bw.d_smooth, p=settings.p, kernels=settings.kernels)
    rcfg = RearrangeConfig(b=b, kappa=settings.kernels.kappa, u_grid=settings.u_grid)
    return cfg, rcfg


def run_test(data: Dataset, settings: TestSettings) -> TestReport:
    g = select_g(data)
    bw = choose_bandwidths(data, settings.h)
    cfg, rcfg = build_configs(bw, settings)
    fit = fit_quantile_curve(data, settings.tau, cfg, rcfg, g)
    bcfg = BootstrapConfig(
        bandwidths=bw, n_reps=settings.n_reps, alpha=settings.alpha, seed=settings.seed, kernels=settings.kernels
    )
    outcome = bootstrap_ks(data, fit, bcfg)
    k_orig = None
    if settings.trim_boundary:
        k_orig = t_original_surface(data, fit, RegionSpec(trim_boundary=True), h=bw.h).sup_abs
    return TestReport(outcome=outcome, fit=fit, bandwidths=bw, g=g, k_original=k_orig)
