import numpy as np
import pytest
from pydantic import ValidationError

from errors import InsufficientDataError, InvalidInputError
from fit import (
    FitMethod,
    FitResult,
    fit_binomial,
    fit_model,
    fit_powerlaw_tail,
    loglog_fit,
    sample_powerlaw_degrees,
    vuong_vs_geometric,
)
from generator import ModelParams, RadiusMode, generate
from graphstats import DegreeHistogram, degree_histograms
from theory import edge_prob_exact


@pytest.fixture(scope="module")
def synthetic_hist():
    degrees = sample_powerlaw_degrees(100_000, 10 / 3, 10, 10_000, seed=1)
    return DegreeHistogram.from_degrees(degrees)


def test_tail_fit_recovers_exponent(synthetic_hist):
    result = fit_powerlaw_tail(synthetic_hist)
    assert result.gamma_hat == pytest.approx(10 / 3, abs=0.05)
    assert result.beta_hat == pytest.approx(7 / 3, abs=0.05)
    assert result.k_min >= 10
    assert result.n_tail >= 50
    assert result.power_law_plausible


def test_fit_model_recovers_alpha(synthetic_hist):
    out_hist = DegreeHistogram.from_degrees(np.full(synthetic_hist.total, 5))
    result = fit_model(synthetic_hist, out_hist, n=synthetic_hist.total, d=3)
    assert result.alpha_hat == pytest.approx(8.0, abs=0.15)
    assert result.z_hat == pytest.approx(5 / (synthetic_hist.total - 1))
    assert result.z_theory is not None


def test_loglog_method_uses_regression_slope(synthetic_hist):
    result = fit_powerlaw_tail(synthetic_hist, FitMethod.loglog_ls)
    assert result.method == FitMethod.loglog_ls
    assert result.beta_hat == result.loglog_beta


def test_loglog_fit_on_noise_free_counts():
    counts = {k: int(round(1e7 * k ** (-10 / 3))) for k in range(1, 21)}
    hist = DegreeHistogram(counts=counts, total=sum(counts.values()))
    assert loglog_fit(hist) == pytest.approx(7 / 3, abs=0.05)


def test_degenerate_histogram_is_insufficient():
    with pytest.raises(InsufficientDataError):
        fit_powerlaw_tail(DegreeHistogram.from_degrees(np.ones(1000, dtype=int)))


def test_loglog_needs_two_degrees():
    with pytest.raises(InsufficientDataError):
        loglog_fit(DegreeHistogram.from_degrees([4, 4, 4]))


def test_geometric_tail_is_flagged():
    degrees = np.random.default_rng(2).geometric(0.15, size=20_000)
    hist = DegreeHistogram.from_degrees(degrees)
    result = fit_powerlaw_tail(hist)
    assert not result.power_law_plausible
    with pytest.raises(InsufficientDataError):
        fit_model(hist, hist, n=hist.total, strict=True)


def test_vuong_prefers_power_law_on_power_law_data():
    tail = sample_powerlaw_degrees(20_000, 2.5, 5, 100_000, seed=3)
    ratio, p_value = vuong_vs_geometric(tail, 2.5, 5)
    assert ratio > 0
    assert p_value < 0.05


def test_fit_binomial_moment_identity():
    fit = fit_binomial(DegreeHistogram.from_degrees(np.full(101, 5)), 101)
    assert fit.z_hat == pytest.approx(0.05)


def test_fit_binomial_empty_graph():
    fit = fit_binomial(DegreeHistogram.from_degrees(np.zeros(10, dtype=int)), 10)
    assert fit.z_hat == 0.0
    assert fit.tv_distance == pytest.approx(0.0)


def test_fit_binomial_rejects_tiny_n():
    with pytest.raises(InvalidInputError):
        fit_binomial(DegreeHistogram.from_degrees([0]), 1)


def test_sample_powerlaw_degrees_range():
    degrees = sample_powerlaw_degrees(1000, 2.0, 3, 50, seed=0)
    assert degrees.min() >= 3 and degrees.max() <= 50
    with pytest.raises(InvalidInputError):
        sample_powerlaw_degrees(10, 2.0, 5, 4)


def test_fixed_radius_graph_has_no_power_law_tail():
    _, g = generate(ModelParams(n=5000, alpha=8.0, d=2, seed=0, radius_mode=RadiusMode.fixed_r0))
    in_hist, out_hist = degree_histograms(g)
    with pytest.raises(InsufficientDataError):
        fit_model(in_hist, out_hist, g.n, d=2, strict=True)


@pytest.mark.slow
def test_round_trip_on_generated_graph():
    n = 50_000
    _, g = generate(ModelParams(n=n, alpha=8.0, d=3, seed=0))
    in_hist, out_hist = degree_histograms(g)
    result = fit_model(in_hist, out_hist, n, d=3)
    assert result.beta_hat == pytest.approx(7 / 3, abs=0.3)
    assert result.alpha_hat == pytest.approx(8.0, abs=1.0)
    assert result.z_hat == pytest.approx(edge_prob_exact(n, 8.0, 3), rel=0.05)


def test_fixed_radius_graph_fails_by_default_and_flags_when_lenient():
    _, g = generate(ModelParams(n=5000, alpha=8.0, d=2, seed=0, radius_mode=RadiusMode.fixed_r0))
    in_hist, out_hist = degree_histograms(g)
    with pytest.raises(InsufficientDataError):
        fit_model(in_hist, out_hist, g.n, d=2)
    assert not fit_model(in_hist, out_hist, g.n, d=2, strict=False).power_law_plausible


def test_loglog_rejects_non_decaying_counts():
    hist = DegreeHistogram(counts={1: 10, 2: 40, 4: 160}, total=210)
    with pytest.raises(InsufficientDataError):
        loglog_fit(hist)


def test_fit_result_requires_positive_beta():
    with pytest.raises(ValidationError):
        FitResult(beta_hat=-0.5, gamma_hat=1.5, z_hat=0.1, k_min=1, n_tail=60, goodness=0.1)
