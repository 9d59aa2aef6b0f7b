"""Significance testing of a covariate block in nonparametric quantile regression.

Typical use::

    from qsig import Dataset, TestSettings, run_test
    report = run_test(Dataset(y, x, z), TestSettings(tau=0.5, seed=1))
    report.outcome.reject
"""

from .bandwidth import BandwidthSet, default_bandwidths, rice_variance
from .bootstrap import BootstrapConfig, TestOutcome, bootstrap_ks, cond_dist_z
from .cdf_estimator import Dataset, EstimatorConfig, estimate_cdf, estimate_cdf_profile, monomial_basis
from .kernels import KernelBundle, KernelSpec, eval_cdf, eval_density, omega_smoothed_indicator, product_kernel
from .pipeline import TestReport, TestSettings, run_test
from .process import QuantileFit, RegionSpec, fit_quantile_curve, t_original_surface, t_tilde_surface
from .rearrangement import GSpec, RearrangeConfig, h_functional, quantile_estimate, select_g

__all__ = [
    "BandwidthSet", "BootstrapConfig", "Dataset", "EstimatorConfig", "GSpec", "KernelBundle", "KernelSpec",
    "QuantileFit", "RearrangeConfig", "RegionSpec", "TestOutcome", "TestReport", "TestSettings",
    "bootstrap_ks", "cond_dist_z", "default_bandwidths", "estimate_cdf", "estimate_cdf_profile", "eval_cdf",
    "eval_density", "fit_quantile_curve", "h_functional", "monomial_basis", "omega_smoothed_indicator",
    "product_kernel", "quantile_estimate", "rice_variance", "run_test", "select_g", "t_original_surface",
    "t_tilde_surface",
]
