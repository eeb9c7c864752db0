import math
import time

import numpy as np
import pytest

from cspscreen.annotation import AnnotationCounts
from cspscreen.estimator import (
    CombinedEstimate,
    beta_cdf,
    beta_posterior,
    beta_quantile,
    combine,
    estimate_to_json,
    extrapolate_small,
    market_share,
)


def trapezoid_beta_quantiles(a: float, b: float, probs, n_grid: int = 400_001):
    """Integration oracle: trapezoid CDF of the Beta density on a uniform grid,
    inverted by linear interpolation."""
    x = np.linspace(0.0, 1.0, n_grid)
    inner = x[1:-1]
    log_inner = (a - 1) * np.log(inner) + (b - 1) * np.log1p(-inner)
    peak = float(np.max(log_inner))
    density = np.empty(n_grid)
    density[1:-1] = np.exp(log_inner - peak)
    density[0] = 0.0 if a > 1 else math.exp(-peak)
    density[-1] = 0.0 if b > 1 else math.exp(-peak)
    h = x[1] - x[0]
    cdf = np.concatenate([[0.0], np.cumsum((density[1:] + density[:-1]) * 0.5 * h)])
    cdf /= cdf[-1]
    return [float(np.interp(p, cdf, x)) for p in probs]


class TestBetaQuantiles:
    def test_fifty_random_pairs_match_trapezoid_oracle_under_a_second(self):
        rng = np.random.default_rng(0)
        start = time.perf_counter()
        worst = 0.0
        for _ in range(50):
            tp = int(rng.integers(0, 60))
            fp = int(rng.integers(0, 200))
            a, b = tp + 1.0, fp + 1.0
            got = [beta_quantile(p, a, b) for p in (0.025, 0.5, 0.975)]
            elapsed = time.perf_counter() - start
            want = trapezoid_beta_quantiles(a, b, (0.025, 0.5, 0.975))
            worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
        assert worst < 1e-5
        assert elapsed < 1.0  # oracle time excluded; implementation time only

    def test_against_scipy(self):
        from scipy.stats import beta as scipy_beta
        rng = np.random.default_rng(1)
        for _ in range(25):
            a = float(rng.uniform(1, 80))
            b = float(rng.uniform(1, 300))
            p = float(rng.uniform(0.01, 0.99))
            assert beta_quantile(p, a, b) == pytest.approx(
                scipy_beta.ppf(p, a, b), abs=1e-8)
            x = float(rng.uniform(0.001, 0.999))
            assert beta_cdf(x, a, b) == pytest.approx(
                scipy_beta.cdf(x, a, b), abs=1e-10)

    def test_uniform_prior(self):
        est = beta_posterior(AnnotationCounts(0, 0, 0, 1, "NN"))
        assert est.theta_median == pytest.approx(0.5, abs=1e-8)
        assert est.theta_ci[0] == pytest.approx(0.025, abs=1e-8)
        assert est.theta_ci[1] == pytest.approx(0.975, abs=1e-8)

    def test_invalid_p(self):
        with pytest.raises(ValueError):
            beta_quantile(0.0, 2, 3)

    def test_monotone_in_counts(self):
        def median(tp, fp):
            return beta_posterior(AnnotationCounts(tp, fp, 0, 100, "NN")).theta_median
        assert median(5, 50) < median(10, 50) < median(20, 50)
        assert median(10, 80) < median(10, 40) < median(10, 10)


class TestReferenceCounts:
    def test_nn_counts(self):
        est = beta_posterior(AnnotationCounts(11, 89, 0, 2944, "NN"))
        assert est.point == pytest.approx(339, abs=1.0)
        assert 161 <= est.point <= 572
        assert abs(est.point - 330) / 330 < 0.03

    def test_logit_counts(self):
        est = beta_posterior(AnnotationCounts(1, 99, 0, 3677, "LOGIT"))
        assert round(est.point) == 61

    def test_unknowns_as_fp_sensitivity(self):
        base = beta_posterior(AnnotationCounts(11, 85, 4, 2944, "NN"))
        conservative = beta_posterior(AnnotationCounts(11, 85, 4, 2944, "NN"),
                                      unknowns_as_fp=True)
        assert conservative.point < base.point
        assert conservative.beta == base.beta + 4


class TestCombine:
    def _sources(self):
        return [beta_posterior(AnnotationCounts(11, 89, 0, 2944, "NN")),
                beta_posterior(AnnotationCounts(1, 99, 0, 3677, "LOGIT"))]

    def test_single_source_degenerate(self):
        src = beta_posterior(AnnotationCounts(11, 89, 0, 2944, "NN"))
        combined = combine([src], n_mc=1_000_000, seed=0)
        assert combined.median == pytest.approx(src.point, abs=3.0)
        assert combined.ci95[0] == pytest.approx(src.ci95[0], abs=3.0)
        assert combined.ci95[1] == pytest.approx(src.ci95[1], abs=3.0)

    def test_two_concentrated_sources_double(self):
        src = beta_posterior(AnnotationCounts(50_000, 50_000, 0, 1000, "NN"))
        combined = combine([src, src], n_mc=200_000, seed=1)
        assert combined.median == pytest.approx(2 * src.point, rel=0.01)

    def test_reference_counts_median_and_runtime(self):
        start = time.perf_counter()
        combined = combine(self._sources(), n_mc=1_000_000, seed=0)
        elapsed = time.perf_counter() - start
        assert elapsed < 30.0
        assert abs(combined.median - 402) / 402 < 0.05
        assert combined.median == pytest.approx(339.0 + 60.9, abs=15.0)

    def test_interval_contained_in_component_sums(self):
        sources = self._sources()
        combined = combine(sources, n_mc=200_000, seed=2)
        lo_sum = sum(s.ci95[0] for s in sources)
        hi_sum = sum(s.ci95[1] for s in sources)
        assert lo_sum <= combined.median <= hi_sum
        assert combined.ci95[0] >= lo_sum - 1e-9
        assert combined.ci95[1] <= hi_sum + 1e-9
        width = combined.ci95[1] - combined.ci95[0]
        naive = sum(s.ci95[1] - s.ci95[0] for s in sources)
        assert width < naive

    def test_bitwise_reproducible(self):
        a = combine(self._sources(), n_mc=100_000, seed=5)
        b = combine(self._sources(), n_mc=100_000, seed=5)
        assert a.median == b.median
        assert a.ci95 == b.ci95

    def test_empty_sources(self):
        with pytest.raises(ValueError):
            combine([])


class TestMarketShare:
    def test_fixture_matches_direct_arithmetic(self):
        src = beta_posterior(AnnotationCounts(11, 89, 0, 2944, "NN"))
        combined = combine([src], n_mc=100_000, seed=3)
        shares = market_share(
            combined, licensed_directors=909, licensed_positions=10_000.0,
            licensed_companies=9_000.0, licensed_independents=5_000.0,
            avg_positions_per_flagged=8.0, avg_companies_per_flagged=7.0,
            avg_independents_per_flagged=4.0)
        by_metric = {s.metric: s for s in shares}
        # Recompute on the same seeded draw stream.
        rng = np.random.default_rng(3)
        draws = rng.beta(src.alpha, src.beta, size=100_000) * src.n_candidates
        want = float(np.median(draws / (draws + 909)))
        assert by_metric["directors"].share_median == pytest.approx(want)
        want_pos = float(np.median(draws * 8.0 / (draws * 8.0 + 10_000.0)))
        assert by_metric["positions"].share_median == pytest.approx(want_pos)

    def test_director_share_anchor(self):
        src_nn = beta_posterior(AnnotationCounts(11, 89, 0, 2944, "NN"))
        src_lg = beta_posterior(AnnotationCounts(1, 99, 0, 3677, "LOGIT"))
        combined = combine([src_nn, src_lg], n_mc=500_000, seed=0)
        shares = market_share(combined, licensed_directors=909,
                              licensed_positions=1.0, licensed_companies=1.0,
                              licensed_independents=1.0,
                              avg_positions_per_flagged=0.0,
                              avg_companies_per_flagged=0.0,
                              avg_independents_per_flagged=0.0)
        directors = next(s for s in shares if s.metric == "directors")
        assert directors.share_median == pytest.approx(0.31, abs=0.02)
        # Zero per-director averages force zero shares for the other metrics.
        positions = next(s for s in shares if s.metric == "positions")
        assert positions.share_median == 0.0
        assert positions.illegal_median == 0.0


class TestExtrapolation:
    def test_exact_power_law_recovered(self):
        c, s = 0.2, -1.3
        fractions = {k: c * k ** s for k in range(1, 11)}
        fit = extrapolate_small(fractions, {1: 1000, 2: 800})
        assert fit.slope == pytest.approx(s, abs=1e-10)
        assert fit.intercept == pytest.approx(math.log(c), abs=1e-10)
        assert fit.predicted_directors[1] == pytest.approx(c * 1000, rel=1e-9)
        assert fit.predicted_directors[2] == pytest.approx(c * 2 ** s * 800, rel=1e-9)
        assert fit.predicted_companies[2] == pytest.approx(2 * fit.predicted_directors[2])

    def test_flat_input(self):
        fractions = {k: 0.05 for k in range(1, 11)}
        fit = extrapolate_small(fractions, {1: 200, 2: 100})
        assert fit.slope == pytest.approx(0.0, abs=1e-12)
        assert fit.predicted_directors[1] == pytest.approx(10.0)
        assert fit.predicted_directors[2] == pytest.approx(5.0)

    def test_tp_rate_scales_fractions(self):
        fractions = {k: 0.1 * k ** -1.0 for k in range(1, 11)}
        full = extrapolate_small(fractions, {1: 100, 2: 100})
        adjusted = extrapolate_small(fractions, {1: 100, 2: 100}, tp_rate=0.11)
        assert adjusted.predicted_directors[1] == pytest.approx(
            0.11 * full.predicted_directors[1])
        assert adjusted.slope == pytest.approx(full.slope, abs=1e-12)

    def test_zero_fractions_omitted(self):
        fractions = {1: 0.1, 2: 0.0, 3: 0.1, 4: 0.0, 5: 0.1}
        fit = extrapolate_small(fractions, {1: 10, 2: 10})
        assert fit.slope == pytest.approx(0.0, abs=1e-12)

    def test_too_few_points(self):
        with pytest.raises(ValueError):
            extrapolate_small({1: 0.1}, {1: 10, 2: 10})


class TestSerialization:
    def test_estimate_json_shape(self):
        src = beta_posterior(AnnotationCounts(2, 8, 0, 100, "NN"))
        combined = combine([src], n_mc=10_000, seed=0)
        import json
        doc = json.loads(estimate_to_json([src], combined))
        assert doc["per_source"][0]["alpha"] == 3.0
        assert doc["combined"]["n_mc"] == 10_000
        assert "median" in doc["combined"]
