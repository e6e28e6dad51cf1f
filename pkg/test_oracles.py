"""
test_oracles.py

Closed forms, quadrature, Monte Carlo and Nystrom oracles, the circle
adjudication, rate fits, graphon bounds and Hausdorff gaps.
"""

import math

import numpy as np
import pytest
import scipy.special
from scipy.stats import norm

from irdpg.conflict_detector import ConflictDetector
from irdpg.graphgen import sample_latents
from irdpg.kernels import KernelModel, LatentModel, make_model, untruncated_reference
from irdpg.oracles import (
    OracleReport,
    circle_cubes_lower_bound,
    circle_rho_candidates,
    circle_sum_cubes,
    composite_gauss_legendre,
    cross_check_sum_lambda_cubed,
    delta_n,
    expected_degree,
    fit_log_log,
    graphon_delta_bound,
    hausdorff_gap,
    hausdorff_gap_from_points,
    monte_carlo_rho_delta,
    rate_fit,
    rho_closed_form,
    rho_delta_quadrature,
    sum_lambda_cubed,
    truncation_correction,
)


def unit_interval() -> LatentModel:
    return LatentModel(domain_kind="interval_positive", distribution="uniform", scale=1.0)


def circle(r: float):
    return LatentModel(domain_kind="circle", distribution="uniform", scale=r), KernelModel(kind="circle_heat")


# --------------------------
# Reports
# --------------------------

def test_report_validation():
    with pytest.raises(ValueError):
        OracleReport(quantity="rho", value=-0.1, method="quadrature", model="m")
    with pytest.raises(ValueError):
        OracleReport(quantity="rho", value=0.1, method="quadrature", model="m", std_error=0.01)
    with pytest.raises(ValueError):
        OracleReport(quantity="rho", value=0.1, method="monte_carlo", model="m")
    row = OracleReport(quantity="rho", value=0.2, method="closed_form", model="m",
                       candidates={"a": 0.2, "b": 0.1}, selected="a").as_row()
    assert row["candidate_a"] == 0.2 and row["selected"] == "a"
    assert "details" not in row


# --------------------------
# Closed forms
# --------------------------

def test_gaussian_closed_form_rho():
    latent, kernel = make_model("Ex1", 4000)
    report = rho_closed_form(latent, kernel)
    assert report.value == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert report.details["reference"] == "untruncated"


def test_graphon_closed_form_rho_is_level():
    latent, kernel = make_model("Graphon", 500)
    assert rho_closed_form(latent, kernel).value == pytest.approx(1.0 / 500)


def test_logistic_has_no_closed_form():
    latent, kernel = make_model("Logistic", 1000)
    with pytest.raises(ValueError):
        rho_closed_form(latent, kernel)


def test_circle_candidates():
    candidates = circle_rho_candidates(2.0)
    assert candidates["bessel"] == pytest.approx(math.exp(-4.0) * scipy.special.iv(0, 4.0), rel=1e-12)
    assert candidates["bessel_over_r"] == pytest.approx(candidates["bessel"] / 2.0)


def test_circle_rho_adjudicated_by_monte_carlo():
    report = rho_closed_form(*circle(2.0), mc_pairs=200_000, seed=1)
    assert report.selected == "bessel"
    assert report.value == pytest.approx(scipy.special.ive(0, 4.0))
    assert report.details["conflict_detected"] is True
    assert abs(report.details["monte_carlo"] - report.value) < 5 * report.details["monte_carlo_se"]


def test_circle_sum_cubes_above_lower_bound():
    for r in (1.0, 2.0, 4.0, 8.0):
        assert circle_sum_cubes(r) > circle_cubes_lower_bound(r)
    assert circle_cubes_lower_bound(1.0) == pytest.approx(1.0 / (8.0 * math.sqrt(3.0) * math.pi))


# --------------------------
# Quadrature
# --------------------------

def test_composite_rule_integrates_polynomials():
    nodes, weights = composite_gauss_legendre(-1.0, 3.0, 5, 4)
    assert nodes.size == 20
    assert weights.sum() == pytest.approx(4.0)
    assert float(weights @ nodes ** 3) == pytest.approx((3.0 ** 4 - 1.0) / 4.0)


def test_constant_kernel_quadrature():
    rho, delta = rho_delta_quadrature(unit_interval(), KernelModel(kind="graphon_constant", level=1.0), n=10)
    assert rho.value == pytest.approx(1.0, rel=1e-12)
    assert delta.value == pytest.approx(1.0, rel=1e-12)
    assert delta.details["delta_n"] == pytest.approx(12.0)
    assert delta_n(1.0, 10) == pytest.approx(12.0)


@pytest.mark.parametrize("sigma", [1.0, 2.0, 5.0])
def test_untruncated_quadrature_matches_closed_form(sigma):
    latent, kernel = untruncated_reference(sigma)
    rho, delta = rho_delta_quadrature(latent, kernel)
    assert rho.value == pytest.approx(1.0 / math.sqrt(2.0 * sigma ** 2 + 1.0), abs=1e-6)
    assert delta.value == pytest.approx(kernel.spectrum.sum_cubes, rel=1e-6)
    assert rho.quad_error < 1e-4


def test_circle_quadrature_matches_bessel():
    rho, delta = rho_delta_quadrature(*circle(1.5))
    assert rho.value == pytest.approx(scipy.special.ive(0, 2.25), rel=1e-8)
    assert delta.value == pytest.approx(circle_sum_cubes(1.5), rel=1e-8)


def test_quadrature_grid_floor():
    with pytest.raises(ValueError):
        rho_delta_quadrature(*untruncated_reference(1.0), grid=32)


def test_two_dimensional_domain_falls_back_to_monte_carlo():
    latent, kernel = make_model("Square2D", 1000, "1")
    rho, _ = rho_delta_quadrature(latent, kernel, mc_samples=5000, seed=2)
    assert rho.method == "monte_carlo"
    assert rho.std_error > 0


@pytest.mark.parametrize("sigma", [1.0, 2.0])
def test_truncation_ratios(sigma):
    result = truncation_correction(sigma)
    mass = 1.0 - 2.0 * norm.cdf(-sigma)
    assert result["mass"] == pytest.approx(mass)
    assert result["rho_ratio"] == pytest.approx(result["predicted_rho_ratio"], rel=1e-10)
    assert result["triple_ratio"] == pytest.approx(result["predicted_triple_ratio"], rel=1e-10)
    assert result["rho_ratio_to_closed_form"] > 0


@pytest.mark.parametrize("sigma", [5.0, 6.0])
def test_corrected_truncated_values_match_untruncated_closed_forms(sigma):
    result = truncation_correction(sigma)
    assert result["rho_corrected"] == pytest.approx(result["rho_closed_form_untruncated"], rel=1e-4)
    assert result["triple_corrected"] == pytest.approx(result["triple_closed_form_untruncated"], rel=1e-4)


# --------------------------
# Monte Carlo and eigenvalue sums
# --------------------------

def test_monte_carlo_is_thread_invariant():
    latent, kernel = untruncated_reference(1.0)
    single = monte_carlo_rho_delta(latent, kernel, samples=250_000, seed=3, threads=1)
    pooled = monte_carlo_rho_delta(latent, kernel, samples=250_000, seed=3, threads=3)
    assert single[0].value == pooled[0].value
    assert single[1].value == pooled[1].value
    assert abs(single[0].value - 1.0 / math.sqrt(3.0)) < 5 * single[0].std_error
    with pytest.raises(ValueError):
        monte_carlo_rho_delta(latent, kernel, samples=1)


@pytest.mark.parametrize("model", [untruncated_reference(1.0), circle(1.0)])
def test_three_way_sum_of_cubes_agreement(model):
    result = cross_check_sum_lambda_cubed(*model, grid_size=600, samples=200_000, seed=4, rel_tol=0.01)
    assert set(result["reports"]) == {"nystrom", "monte_carlo", "closed_form"}
    assert result["passed"], result["agreement"]


def test_sum_of_cubes_methods():
    latent, kernel = make_model("Graphon", 100)
    assert sum_lambda_cubed(latent, kernel).value == pytest.approx(1e-6)
    latent, kernel = make_model("Logistic", 1000)
    with pytest.raises(ValueError):
        sum_lambda_cubed(latent, kernel, "closed_form")
    with pytest.raises(ValueError):
        sum_lambda_cubed(latent, kernel, "bogus")


def test_expected_degree():
    latent, kernel = make_model("Graphon", 1000)
    report = expected_degree(latent, kernel, 1000, method="closed_form")
    assert report.value == pytest.approx(0.999)
    looped = expected_degree(*untruncated_reference(1.0), 101, self_loops=True)
    assert looped.value == pytest.approx(100.0 / math.sqrt(3.0) + 1.0, rel=1e-6)


# --------------------------
# Rate fits
# --------------------------

def test_rho_decays_like_inverse_sigma():
    fit = rate_fit("gaussian_untruncated", [2, 4, 8, 16, 32], "rho", claimed_slope=-1.0, tolerance=0.05)
    assert fit.passed
    assert fit.r_squared > 0.99
    assert len(fit.residuals) == 5


def test_gaussian_sum_of_cubes_decays_like_inverse_square():
    fit = rate_fit("gaussian_untruncated", [2, 4, 8, 16, 32], "sum_lambda_cubed", claimed_slope=-2.0, tolerance=0.05,
                   method="closed_form")
    assert fit.passed, fit.slope


def test_circle_sum_of_cubes_decays_like_inverse_square():
    fit = rate_fit("circle", [2, 4, 8, 16, 32], "sum_lambda_cubed", claimed_slope=-2.0, tolerance=0.1,
                   method="closed_form")
    assert fit.passed


def test_rate_fit_reports_failure():
    fit = fit_log_log([1, 2, 4, 8], [1, 0.5, 0.25, 0.125], claimed_slope=-2.0, tolerance=0.1)
    assert fit.slope == pytest.approx(-1.0)
    assert not fit.passed


@pytest.mark.parametrize("x, y", [
    ([1, 2, 3], [1, 2, 3]),
    ([1, 2, 3, 4], [1, 0, 3, 4]),
    ([2, 2, 2, 2], [1, 2, 3, 4]),
    ([1, 2, 3, 4], [1, 2, 3]),
])
def test_rate_fit_errors(x, y):
    with pytest.raises(ValueError):
        fit_log_log(x, y, -1.0, 0.1)


def test_rate_fit_unknown_family():
    with pytest.raises(ValueError):
        rate_fit("torus", [1, 2, 3, 4], "rho", -1.0, 0.1)


# --------------------------
# Graphon bounds and Hausdorff gaps
# --------------------------

def test_graphon_delta_bound():
    assert graphon_delta_bound(1.0, 4) == pytest.approx(1.0)
    assert graphon_delta_bound(0.0, 1000) == 0.0
    assert graphon_delta_bound(0.1, 100, 0.5) == pytest.approx(99 * 98 / 6.0 * 1e-3 * 0.5)
    with pytest.raises(ValueError):
        graphon_delta_bound(1.5, 10)


def test_hausdorff_gap_from_points():
    assert hausdorff_gap_from_points([0.5], 0.0, 1.0) == pytest.approx(0.5)
    n = 10
    grid = (2 * np.arange(n) + 1) / (2 * n)
    assert hausdorff_gap_from_points(grid, 0.0, 1.0) == pytest.approx(1.0 / (2 * n))
    assert hausdorff_gap_from_points([0.0, 1.0], 0.0, 1.0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        hausdorff_gap_from_points([], 0.0, 1.0)


def test_hausdorff_gap_needs_interval():
    latent, _ = circle(1.0)
    with pytest.raises(ValueError):
        hausdorff_gap(sample_latents(latent, 10, 0))


@pytest.mark.slow
def test_hausdorff_gap_scales_like_log_n_over_n():
    n = 10_000
    scaled = [hausdorff_gap(sample_latents(unit_interval(), n, seed)).details["scaled"] for seed in range(100)]
    assert 0.4 <= float(np.median(scaled)) <= 1.6


# --------------------------
# Conflict detection
# --------------------------

def test_conflict_detector_picks_consistent_candidate():
    report = ConflictDetector.detect_conflicts({"a": 0.50, "b": 0.25}, estimate=0.501, std_error=0.002)
    assert report["conflict_detected"]
    assert report["selected"] == "a"
    assert report["consistent"] == ["a"]
    assert report["conflicts"][0]["field"] == "candidate_value"


def test_conflict_detector_indistinguishable_and_empty():
    report = ConflictDetector.detect_conflicts({"a": 0.5, "b": 0.5001}, estimate=0.5, std_error=0.01)
    assert not report["conflict_detected"]
    assert report["selected"] == "a"
    assert report["conflicts"] == []
    with pytest.raises(ValueError):
        ConflictDetector.detect_conflicts({}, estimate=0.5, std_error=0.01)
