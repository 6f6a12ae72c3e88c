"""Exact second-order theory: K-functions and count variances.

Every numerical assertion here is checked against an independent route:
lattice-point enumeration for the unperturbed case, plain normal CDF sums
in one dimension, scipy's noncentral chi-squared CDF over generously
truncated shells in three, an order-statistics argument for interval
count variances, and a Bernoulli-mixture quadrature for the perturbed
interval variance.
"""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import roots_legendre

from hyperlat import ConfigError, CovarianceModel, NumericalError
from hyperlat.gaussfield import coord_covariance
from hyperlat.geometry import integer_norm_table
from hyperlat.ktheory import (
    KappaField,
    SummaryCurve,
    _spectral_variance_stationarized_dual,
    decay_exponent,
    default_shell_halfwidth,
    hyperuniformity_condition_report,
    k_theoretical,
    l_centered_from_k,
    spectral_variance_iid,
    spectral_variance_stationarized,
)

KD3 = 4.0 * math.pi / 3.0


# ---------------------------------------------------------------------------
# unperturbed lattice: K is a lattice-point counting function
# ---------------------------------------------------------------------------

def brute_shell_count(dim: int, r: float) -> int:
    """Nonzero integer vectors with norm <= r, by direct enumeration."""
    import itertools
    m = int(math.ceil(r))
    count = 0
    for z in itertools.product(range(-m, m + 1), repeat=dim):
        if any(z) and sum(c * c for c in z) <= r * r + 1e-9:
            count += 1
    return count


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_stationarized_counts_match_enumeration(dim):
    rs = np.array([0.7, 1.05, 1.45, 1.75, 2.05, 2.6])
    curve = k_theoretical(CovarianceModel("stationarized", dim), rs)
    expected = [brute_shell_count(dim, r) for r in rs]
    assert curve.kind == "K"
    np.testing.assert_array_equal(curve.values, expected)


def test_stationarized_boundary_radius_inclusive():
    # a site at distance exactly r counts
    curve = k_theoretical(CovarianceModel("stationarized", 3), np.array([1.0]))
    assert curve.values[0] == 6.0


def test_sigma_zero_iid_equals_stationarized():
    rs = np.linspace(0.2, 3.0, 12)
    a = k_theoretical(CovarianceModel("iid", 2, sigma=0.0), rs)
    b = k_theoretical(CovarianceModel("stationarized", 2), rs)
    np.testing.assert_array_equal(a.values, b.values)


def test_small_sigma_approaches_counts():
    # r = 1.2 sits between the shells at 1 and sqrt(2); with sigma = 1e-3
    # the transition zones are dozens of standard deviations away
    curve = k_theoretical(CovarianceModel("iid", 3, sigma=1e-3), np.array([1.2]))
    assert curve.values[0] == pytest.approx(6.0, abs=1e-12)


# ---------------------------------------------------------------------------
# perturbed K against independent CDF-sum oracles
# ---------------------------------------------------------------------------

def k_oracle_1d(sigma: float, rs: np.ndarray) -> np.ndarray:
    """Normal CDF sum over sites, no shell logic at all."""
    s = math.sqrt(2.0) * sigma
    out = []
    for r in rs:
        lo = -int(math.ceil(r + 40 * sigma + 2))
        sites = np.arange(lo, -lo + 1)
        sites = sites[sites != 0].astype(float)
        out.append(np.sum(stats.norm.cdf((r - sites) / s)
                          - stats.norm.cdf((-r - sites) / s)))
    return np.array(out)


def k_oracle_3d(model: CovarianceModel, rs: np.ndarray, cut: float = 18.0) -> np.ndarray:
    """scipy noncentral chi-squared over a generous brute-force shell."""
    out = []
    for r in rs:
        reach = r + cut
        nsq, counts = integer_norm_table(3, int(math.ceil(reach * reach)))
        keep = nsq > 0
        nsq_f = nsq[keep].astype(float)
        cnt = counts[keep].astype(float)
        kappa = 2 * model.sigma**2 - 2 * np.asarray(
            coord_covariance(model, np.sqrt(nsq_f)))
        p = stats.ncx2.cdf(r * r / kappa, 3, nsq_f / kappa)
        out.append(float(np.sum(cnt * p)))
    return np.array(out)


def test_iid_k_matches_normal_cdf_oracle_1d():
    rs = np.array([0.3, 0.9, 1.6, 2.7])
    curve = k_theoretical(CovarianceModel("iid", 1, sigma=0.25), rs)
    np.testing.assert_allclose(curve.values, k_oracle_1d(0.25, rs), atol=1e-12)


def test_iid_k_matches_shell_oracle_3d():
    rs = np.array([0.5, 1.2, 2.0, 3.0])
    model = CovarianceModel("iid", 3, sigma=0.2)
    curve = k_theoretical(model, rs)
    np.testing.assert_allclose(curve.values, k_oracle_3d(model, rs), rtol=1e-10)


def test_powexp_k_matches_shell_oracle_3d():
    rs = np.array([0.5, 1.2, 2.0, 3.0])
    model = CovarianceModel("powexp", 3, sigma=0.3, range_=2.5, gamma=1.5)
    curve = k_theoretical(model, rs)
    np.testing.assert_allclose(curve.values, k_oracle_3d(model, rs), rtol=1e-10)


def test_k_basic_shape_properties():
    rs = np.linspace(0.05, 3.0, 60)
    curve = k_theoretical(CovarianceModel("powexp", 3, sigma=0.3, range_=2.5, gamma=2.0), rs)
    assert np.all(curve.values >= 0)
    assert np.all(np.diff(curve.values) >= 0)
    # at r = 3 the perturbed lattice K is within a few percent of the
    # Poisson benchmark kappa_d r^d
    assert curve.values[-1] == pytest.approx(KD3 * 27.0, rel=0.05)


def test_k_meta_records_model_and_shell():
    model = CovarianceModel("iid", 3, sigma=0.2)
    curve = k_theoretical(model, np.array([1.0, 2.0]), q=9)
    assert curve.meta["model"] == model.to_dict()
    assert curve.meta["q"] == 9
    assert default_shell_halfwidth(3) == 15
    assert default_shell_halfwidth(2) == 8


def test_kappa_field_values():
    model = CovarianceModel("powexp", 3, sigma=0.5, range_=2.0, gamma=1.0)
    kf = KappaField(model)
    # kappa(h) = 2 sigma^2 (1 - exp(-h / range))
    assert kf.kappa(4.0) == pytest.approx(0.5 * (1 - math.exp(-2.0)), abs=1e-15)
    arr = kf.kappa(np.array([0.0, 1e9]))
    assert arr[0] == pytest.approx(0.0, abs=1e-15)
    assert arr[1] == pytest.approx(0.5, abs=1e-15)


def test_degenerate_covariance_raises():
    # range so large the correlation at every lag rounds to one
    model = CovarianceModel("powexp", 3, sigma=0.3, range_=1e20, gamma=1.0)
    with pytest.raises(NumericalError, match="perfectly correlated"):
        k_theoretical(model, np.array([1.0]))


def test_grid_validation():
    model = CovarianceModel("iid", 3, sigma=0.2)
    with pytest.raises(ConfigError):
        k_theoretical(model, np.array([2.0, 1.0]))
    with pytest.raises(ConfigError):
        k_theoretical(model, np.array([-0.5, 1.0]))
    with pytest.raises(ConfigError):
        k_theoretical(model, np.array([]))
    with pytest.raises(ConfigError):
        k_theoretical(model, np.array([1.0, 2.0]), q=0)


# ---------------------------------------------------------------------------
# curves: L-centering and kind bookkeeping
# ---------------------------------------------------------------------------

def test_l_centered_of_poisson_k_is_zero():
    rs = np.linspace(0.1, 4.0, 25)
    curve = SummaryCurve(rs, KD3 * rs**3, "K")
    centered = l_centered_from_k(curve, 3)
    assert centered.kind == "L"
    np.testing.assert_allclose(centered.values, 0.0, atol=1e-12)


def test_l_centered_requires_k_curve():
    rs = np.linspace(0.1, 1.0, 5)
    pcf = SummaryCurve(rs, np.ones_like(rs), "pcf")
    with pytest.raises(ConfigError, match="expected a K curve"):
        l_centered_from_k(pcf, 3)


def test_summary_curve_kind_whitelist():
    rs = np.array([0.5, 1.0])
    SummaryCurve(rs, np.zeros(2), "lvar")       # accepted
    with pytest.raises(ConfigError, match="unknown curve kind"):
        SummaryCurve(rs, np.zeros(2), "bogus")


def test_summary_curve_rejects_bad_grids():
    with pytest.raises(ConfigError):
        SummaryCurve(np.array([1.0, 1.0]), np.zeros(2), "K")
    with pytest.raises(ConfigError):
        SummaryCurve(np.array([1.0]), np.array([np.nan]), "K")
    with pytest.raises(ConfigError):
        SummaryCurve(np.array([1.0, 2.0]), np.array([2.0, 1.0]), "K")


def test_summary_curve_interp_bounds():
    curve = SummaryCurve(np.array([1.0, 2.0]), np.array([0.0, 2.0]), "L")
    assert curve.interp([1.5])[0] == pytest.approx(1.0)
    with pytest.raises(ConfigError):
        curve.interp([2.5])


# ---------------------------------------------------------------------------
# count variance of balls: exact values and cross-checks
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("r, expected", [
    # one dimension, uniform-shifted integer lattice: an interval of
    # length 2r holds floor(2r) or floor(2r)+1 points, with the
    # fractional part frac(2r) as the probability of the larger count,
    # so var = frac (1 - frac) and the ratio is var / (2r)
    (10.25, 0.5 * 0.5 / 20.5),
    (10.125, 0.25 * 0.75 / 20.25),
    (10.0, 0.0),
    (10.5, 0.0),
])
def test_interval_variance_exact_order_statistics(r, expected):
    assert spectral_variance_stationarized(1, r) == pytest.approx(expected, abs=1e-12)


def test_interval_variance_rejects_bad_radius():
    with pytest.raises(ConfigError):
        spectral_variance_stationarized(1, 0.0)
    with pytest.raises(ConfigError):
        spectral_variance_stationarized(2, math.inf)


def test_dual_lattice_form_agrees_3d():
    direct = spectral_variance_stationarized(3, 2.5)
    dual, tail = _spectral_variance_stationarized_dual(3, 2.5, 40.0)
    # the dual truncation is only good to the oscillatory tail residual
    assert abs(direct - dual) <= 2.0 * tail


def test_cubic_lattice_variance_is_class_one():
    # scaled variance decays like 1/r: r * sigma_3(r) stays bounded
    vals = {r: r * spectral_variance_stationarized(3, r) for r in (5.0, 10.0, 20.0)}
    assert all(0.1 < v < 0.5 for v in vals.values())
    assert max(vals.values()) / min(vals.values()) < 1.5


def iid_interval_variance_oracle(sigma: float, r: float, nquad: int = 400) -> float:
    """Bernoulli-mixture route, fully independent of the spectral pairing.

    Conditional on the lattice shift u, counts are a sum of independent
    Bernoulli(p_i(u)) indicators; integrate the conditional variance plus
    the variance of the conditional mean over u in [0, 1).
    """
    lo = -int(math.ceil(r + 12 * sigma + 2))
    sites = np.arange(lo, -lo + 1, dtype=float)
    x, w = roots_legendre(nquad)
    u = 0.5 * (x + 1.0)
    w = 0.5 * w
    z = sites[None, :] + u[:, None]
    p = stats.norm.cdf((r - z) / sigma) - stats.norm.cdf((-r - z) / sigma)
    term1 = np.sum(w * np.sum(p * (1 - p), axis=1))
    total = np.sum(p, axis=1)
    term2 = np.sum(w * (total - 2 * r) ** 2)
    return float((term1 + term2) / (2 * r))


@pytest.mark.parametrize("sigma, r", [(0.3, 2.5), (0.15, 1.75)])
def test_iid_interval_variance_matches_bernoulli_mixture(sigma, r):
    model = CovarianceModel("iid", 1, sigma=sigma)
    got = spectral_variance_iid(model, r)
    want = iid_interval_variance_oracle(sigma, r)
    assert got == pytest.approx(want, abs=1e-9)


def test_iid_variance_sigma_zero_falls_back():
    model = CovarianceModel("iid", 3, sigma=0.0)
    assert spectral_variance_iid(model, 2.5) == pytest.approx(
        spectral_variance_stationarized(3, 2.5), abs=1e-15)


def test_iid_variance_tiny_sigma_rejected():
    model = CovarianceModel("iid", 3, sigma=1e-6)
    with pytest.raises(NumericalError, match="stationarized"):
        spectral_variance_iid(model, 2.5)


def test_iid_variance_rejects_other_kinds():
    model = CovarianceModel("powexp", 3, sigma=0.3, range_=2.5, gamma=1.0)
    with pytest.raises(ConfigError, match="iid"):
        spectral_variance_iid(model, 2.0)


# ---------------------------------------------------------------------------
# decay diagnostics
# ---------------------------------------------------------------------------

def test_decay_exponent_recovers_power_law():
    r = np.linspace(3.0, 40.0, 30)
    assert decay_exponent(r, 7.0 * r**-4.5) == pytest.approx(4.5, abs=1e-10)


def test_decay_exponent_needs_three_points():
    with pytest.raises(ConfigError):
        decay_exponent([1.0, 2.0, 3.0], [1.0, 0.0, 0.0])


def test_condition_report_exponential_decay_passes():
    model = CovarianceModel("powexp", 3, sigma=0.3, range_=2.5, gamma=1.0)
    report = hyperuniformity_condition_report(model)
    assert report["passes"] is True
    assert report["super_polynomial"] is True
    assert report["threshold_exponent"] == 6.0
    assert not report["finite_range"]
    assert "summability" in report and "partial_sums" in report["summability"]


def test_condition_report_iid_is_finite_range():
    report = hyperuniformity_condition_report(CovarianceModel("iid", 3, sigma=0.2))
    assert report["finite_range"] is True
    assert report["fitted_exponent"] == math.inf
    assert report["passes"] is True
