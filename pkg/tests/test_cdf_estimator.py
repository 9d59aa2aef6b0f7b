import numpy as np
import pytest
from scipy.stats import norm

from qsig.cdf_estimator import (
    Dataset,
    EstimatorConfig,
    equivalent_weights,
    estimate_cdf,
    estimate_cdf_profile,
    estimate_cdf_surface,
    monomial_basis,
)
from qsig.errors import ConfigError, DataError, EmptyWindowError, InvalidBandwidthError
from qsig.kernels import KernelBundle, KernelSpec, omega_smoothed_indicator


def _random_data(rng, n=60, d=1):
    x = rng.random((n, d))
    y = x.sum(axis=1) + 0.5 * rng.standard_normal(n)
    return Dataset(y=y, x=x, z=rng.random(n))


def test_monomial_basis():
    assert monomial_basis(1, 2) == [(0,), (1,), (2,)]
    assert monomial_basis(2, 1) == [(0, 0), (1, 0), (0, 1)]
    assert len(monomial_basis(2, 2)) == 6
    assert monomial_basis(2, 2)[3:] == [(2, 0), (1, 1), (0, 2)]
    assert len(monomial_basis(3, 3)) == 20


def test_dataset_validation():
    d = Dataset(y=[1, 2, 3], x=[0.1, 0.2, 0.3], z=[[1, 2], [3, 4], [5, 6]])
    assert (d.n, d.d, d.q) == (3, 1, 2)
    with pytest.raises(DataError):
        Dataset(y=[1, 2], x=[0.1, 0.2, 0.3], z=[1, 2, 3])
    with pytest.raises(DataError):
        Dataset(y=[1, np.nan], x=[0.1, 0.2], z=[1, 2])
    with pytest.raises(DataError):
        Dataset(y=[1], x=[0.1], z=[1])


def test_config_validation():
    with pytest.raises(InvalidBandwidthError):
        EstimatorConfig(h=0.0, d_smooth=0.1)
    with pytest.raises(ConfigError):
        EstimatorConfig(h=0.1, d_smooth=0.1, p=-1)


@pytest.mark.parametrize("p", [0, 1, 2, 3])
def test_constant_response_reproduced(p):
    rng = np.random.default_rng(p)
    x = rng.random(40)
    c = 1.3
    data = Dataset(y=np.full(40, c), x=x, z=rng.random(40))
    cfg = EstimatorConfig(h=0.2, d_smooth=0.3, p=p)
    for y in (1.2, 1.3, 1.35, 1.4):
        expected = float(omega_smoothed_indicator((y - c) / 0.3))
        for x0 in (0.0, 0.37, 0.9):
            assert estimate_cdf(data, [x0], y, cfg) == pytest.approx(expected, abs=1e-10)


def test_below_all_responses_is_zero():
    rng = np.random.default_rng(3)
    data = _random_data(rng)
    cfg = EstimatorConfig(h=0.2, d_smooth=0.25)
    assert estimate_cdf(data, [0.5], data.y.min() - 0.26, cfg) == 0.0
    assert estimate_cdf(data, [0.5], data.y.max() + 0.26, cfg) == pytest.approx(1.0, abs=1e-12)


def test_three_point_local_constant_by_hand():
    y = np.array([0.0, 0.4, 1.0])
    x = np.array([0.1, 0.3, 0.6])
    data = Dataset(y=y, x=x, z=[0, 0, 0])
    h, dn, x0, y0 = 0.25, 0.5, 0.2, 0.3
    cfg = EstimatorConfig(h=h, d_smooth=dn, p=0)
    # hand computation: gaussian weights at (x0 - X_i)/h = 0.4, -0.4, -1.6
    w = np.exp(-0.5 * np.array([0.16, 0.16, 2.56]))
    om = np.array([
        0.5 + (15 / 32) * (0.6 * 3 - (10 / 3) * 0.6**3 + 1.4 * 0.6**5),
        0.5 - (15 / 32) * (0.2 * 3 - (10 / 3) * 0.2**3 + 1.4 * 0.2**5),
        0.0,
    ])
    assert estimate_cdf(data, [x0], y0, cfg) == pytest.approx((w @ om) / w.sum(), abs=1e-14)


def test_p0_matches_nadaraya_watson():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = rng.integers(5, 40)
        d = rng.integers(1, 3)
        data = _random_data(rng, n, d)
        h, dn = rng.uniform(0.1, 0.6), rng.uniform(0.1, 0.6)
        x0 = rng.random(d)
        y0 = rng.normal(0.5 * d, 0.7)
        cfg = EstimatorConfig(h=h, d_smooth=dn, p=0)
        w = np.exp(-0.5 * np.sum(((x0 - data.x) / h) ** 2, axis=1))
        om = omega_smoothed_indicator((y0 - data.y) / dn)
        nw = np.clip(w @ om / w.sum(), 0, 1)
        assert estimate_cdf(data, x0, y0, cfg) == pytest.approx(nw, abs=1e-12)


def test_local_linear_matches_weighted_lstsq():
    rng = np.random.default_rng(21)
    data = _random_data(rng, 80, 2)
    cfg = EstimatorConfig(h=0.3, d_smooth=0.2, p=1)
    x0, y0 = np.array([0.4, 0.55]), 1.0
    diff = x0 - data.x
    w = np.exp(-0.5 * np.sum((diff / 0.3) ** 2, axis=1))
    X = np.column_stack([np.ones(80), diff])
    om = omega_smoothed_indicator((y0 - data.y) / 0.2)
    beta = np.linalg.solve(X.T @ (w[:, None] * X), X.T @ (w * om))
    assert estimate_cdf(data, x0, y0, cfg) == pytest.approx(np.clip(beta[0], 0, 1), abs=1e-10)


def test_profile_equals_scalar_calls_bit_exact():
    rng = np.random.default_rng(4)
    data = _random_data(rng)
    cfg = EstimatorConfig(h=0.25, d_smooth=0.25)
    ys = rng.normal(0.5, 0.7, 5)
    prof = estimate_cdf_profile(data, [0.3], ys, cfg)
    scal = np.array([estimate_cdf(data, [0.3], y, cfg) for y in ys])
    assert np.array_equal(prof, scal)
    assert estimate_cdf_profile(data, [0.3], ys[:1], cfg)[0] == scal[0]


def test_surface_matches_profiles():
    rng = np.random.default_rng(5)
    data = _random_data(rng)
    cfg = EstimatorConfig(h=0.25, d_smooth=0.25)
    ys = np.linspace(-1, 2, 40)
    xs = rng.random((7, 1))
    surf = estimate_cdf_surface(data, xs, ys, cfg)
    for k, x in enumerate(xs):
        assert np.allclose(surf[k], estimate_cdf_profile(data, x, ys, cfg), atol=1e-12, rtol=0)


def test_constant_profile_is_nondecreasing():
    data = Dataset(y=np.full(30, 2.0), x=np.linspace(0, 1, 30), z=np.zeros(30))
    cfg = EstimatorConfig(h=0.2, d_smooth=0.5)
    ys = 2.0 + 0.5 * np.linspace(-0.65, 0.65, 20)  # Omega is monotone on this stretch
    prof = estimate_cdf_profile(data, [0.5], ys, cfg)
    assert np.allclose(prof, np.clip(omega_smoothed_indicator((ys - 2.0) / 0.5), 0, 1), atol=1e-12)
    assert np.all(np.diff(prof) >= 0)


def test_output_clamped():
    rng = np.random.default_rng(9)
    data = _random_data(rng, 25)
    cfg = EstimatorConfig(h=0.08, d_smooth=0.05, p=3)
    ys = np.linspace(-2, 3, 200)
    for x0 in (0.0, 0.5, 1.0, 1.3):
        prof = estimate_cdf_profile(data, [x0], ys, cfg)
        assert prof.min() >= 0 and prof.max() <= 1


def test_empty_window_raises():
    data = Dataset(y=[0.0, 1.0, 2.0], x=[0.0, 0.1, 0.2], z=[0, 0, 0])
    cfg = EstimatorConfig(h=0.1, d_smooth=0.1, kernels=KernelBundle(k_smooth=KernelSpec("epanechnikov")))
    with pytest.raises(EmptyWindowError):
        estimate_cdf(data, [5.0], 1.0, cfg)


def test_singular_design_ridge_then_local_constant():
    # one point in the window: the local quadratic normal matrix has rank one
    data = Dataset(y=[0.0, 1.0, 2.0], x=[0.0, 0.5, 1.0], z=[0, 0, 0])
    epa = KernelBundle(k_smooth=KernelSpec("epanechnikov"))
    x0 = np.array([[0.45]])
    t = (0.45 - 0.5) / 0.2
    # ridge retry: intercept of the ridge solution for a single row (1, t, t^2)
    cfg = EstimatorConfig(h=0.2, d_smooth=0.5, p=2, kernels=epa)
    l = equivalent_weights(data.x, x0, cfg)
    r = 1e-9 * (1 + t**2 + t**4)
    assert l[0, 0] == 0.0 and l[0, 2] == 0.0
    assert l[0, 1] == pytest.approx(1 / (1 + r) - (t**2 + t**4) / ((1 + r) * (r + 1 + t**2 + t**4)), rel=1e-6)
    # no ridge allowed: straight to the local-constant fit
    cfg0 = EstimatorConfig(h=0.2, d_smooth=0.5, p=2, kernels=epa, ridge_eps=0.0)
    assert np.array_equal(equivalent_weights(data.x, x0, cfg0), [[0.0, 1.0, 0.0]])
    assert estimate_cdf(data, [0.45], 1.0, cfg0) == 0.5


def test_large_sample_close_to_truth():
    rng = np.random.default_rng(2000)
    n = 2000
    x = rng.random(n)
    y = x + 0.5 * rng.standard_normal(n)
    data = Dataset(y=y, x=x, z=rng.random(n))
    h = (0.25 / (2 * n)) ** 0.26
    cfg = EstimatorConfig(h=h, d_smooth=h)
    ys = np.linspace(-1, 2, 61)
    for x0 in (0.3, 0.5, 0.7):
        est = estimate_cdf_profile(data, [x0], ys, cfg)
        assert np.max(np.abs(est - norm.cdf(ys, loc=x0, scale=0.5))) < 0.05
