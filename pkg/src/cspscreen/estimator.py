"""Beta-binomial sector-size estimation.

The illegal proportion gets a Beta(TP+1, FP+1) posterior (uniform prior).
Quantiles come from bracketed bisection of the regularized incomplete beta
function, computed by the standard continued-fraction expansion; both are
implemented here so results can be checked against a plain integration
oracle. Per-source estimates are combined by Monte Carlo summation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .annotation import AnnotationCounts


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta function (Lentz's method)."""
    tiny = 1e-300
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 300):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            return h
    raise RuntimeError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def beta_cdf(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def beta_quantile(p: float, a: float, b: float, tol: float = 1e-9) -> float:
    """Inverse of beta_cdf by bisection on [0, 1]."""
    if not (0.0 < p < 1.0):
        raise ValueError("p must be in (0, 1)")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if beta_cdf(mid, a, b) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class PosteriorEstimate:
    alpha: float
    beta: float
    n_candidates: int
    source: str
    theta_median: float
    theta_ci: tuple[float, float]

    @property
    def point(self) -> float:
        return self.theta_median * self.n_candidates

    @property
    def ci95(self) -> tuple[float, float]:
        return (self.theta_ci[0] * self.n_candidates,
                self.theta_ci[1] * self.n_candidates)

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "beta": self.beta,
                "n_candidates": self.n_candidates, "source": self.source,
                "median": self.point, "ci95": list(self.ci95)}


def beta_posterior(c: AnnotationCounts, unknowns_as_fp: bool = False) -> PosteriorEstimate:
    """Beta(TP+1, FP+1) posterior scaled to the candidate population.

    Unknown labels are excluded; unknowns_as_fp is the sensitivity variant
    that folds them into FP.
    """
    fp = c.fp + c.unknown if unknowns_as_fp else c.fp
    a, b = c.tp + 1.0, fp + 1.0
    return PosteriorEstimate(
        alpha=a, beta=b, n_candidates=c.n_candidates, source=c.source,
        theta_median=beta_quantile(0.5, a, b),
        theta_ci=(beta_quantile(0.025, a, b), beta_quantile(0.975, a, b)),
    )


@dataclass
class CombinedEstimate:
    sources: list[PosteriorEstimate]
    n_mc: int
    seed: int
    median: float
    ci95: tuple[float, float]

    def to_dict(self) -> dict:
        return {"sources": [s.to_dict() for s in self.sources],
                "n_mc": self.n_mc, "seed": self.seed,
                "median": self.median, "ci95": list(self.ci95)}


def _combined_draws(sources: list[PosteriorEstimate], n_mc: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    total = np.zeros(n_mc)
    for src in sources:
        total += rng.beta(src.alpha, src.beta, size=n_mc) * src.n_candidates
    return total


def combine(sources: list[PosteriorEstimate], n_mc: int = 1_000_000,
            seed: int = 0) -> CombinedEstimate:
    """Monte Carlo sum of per-source scaled posteriors."""
    if not sources:
        raise ValueError("need at least one source")
    total = _combined_draws(sources, n_mc, seed)
    lo, hi = np.quantile(total, [0.025, 0.975])
    return CombinedEstimate(sources=list(sources), n_mc=n_mc, seed=seed,
                            median=float(np.median(total)), ci95=(float(lo), float(hi)))


@dataclass
class MarketShare:
    metric: str
    illegal_median: float
    illegal_ci95: tuple[float, float]
    share_median: float
    share_ci95: tuple[float, float]

    def to_dict(self) -> dict:
        return {"metric": self.metric, "illegal_median": self.illegal_median,
                "illegal_ci95": list(self.illegal_ci95),
                "share_median": self.share_median,
                "share_ci95": list(self.share_ci95)}


def market_share(
    combined: CombinedEstimate,
    licensed_directors: int,
    licensed_positions: float,
    licensed_companies: float,
    licensed_independents: float,
    avg_positions_per_flagged: float,
    avg_companies_per_flagged: float,
    avg_independents_per_flagged: float,
) -> list[MarketShare]:
    """Illegal market shares by directors, positions, companies and
    independent companies, propagated through the Monte Carlo draws."""
    draws = _combined_draws(combined.sources, combined.n_mc, combined.seed)
    shares = []
    for metric, per_director, licensed_total in (
        ("directors", 1.0, float(licensed_directors)),
        ("positions", avg_positions_per_flagged, licensed_positions),
        ("companies", avg_companies_per_flagged, licensed_companies),
        ("independent_companies", avg_independents_per_flagged, licensed_independents),
    ):
        illegal = draws * per_director
        ratio = illegal / (illegal + licensed_total)
        il_lo, il_hi = np.quantile(illegal, [0.025, 0.975])
        sh_lo, sh_hi = np.quantile(ratio, [0.025, 0.975])
        shares.append(MarketShare(
            metric=metric,
            illegal_median=float(np.median(illegal)),
            illegal_ci95=(float(il_lo), float(il_hi)),
            share_median=float(np.median(ratio)),
            share_ci95=(float(sh_lo), float(sh_hi)),
        ))
    return shares


@dataclass
class ExtrapolationFit:
    slope: float
    intercept: float
    bound_label: str  # UpperBound | LowerBound
    predicted_directors: dict[int, float]  # k in {1, 2}
    predicted_companies: dict[int, float]

    def to_dict(self) -> dict:
        return {"slope": self.slope, "intercept": self.intercept,
                "bound_label": self.bound_label,
                "predicted_directors": {str(k): v for k, v in self.predicted_directors.items()},
                "predicted_companies": {str(k): v for k, v in self.predicted_companies.items()}}


def extrapolate_small(
    fractions_per_k: dict[int, float],
    n_directors_at: dict[int, int],
    tp_rate: float = 1.0,
    bound_label: str = "UpperBound",
    fit_range: tuple[int, int] = (1, 10),
) -> ExtrapolationFit:
    """Least-squares line on (log k, log fraction), predicting director and
    company counts at k in {1, 2}.

    fractions_per_k: observed CSP fraction among directors managing k
    companies; multiplied by tp_rate before fitting (uniform true-positive
    adjustment for flagged samples). Zero fractions are omitted from the fit.
    """
    points = [(math.log(k), math.log(frac * tp_rate))
              for k, frac in sorted(fractions_per_k.items())
              if fit_range[0] <= k <= fit_range[1] and frac * tp_rate > 0.0]
    if len(points) < 2:
        raise ValueError("need at least two positive fractions to fit")
    xs = np.array([p[0] for p in points])
    ys = np.array([p[1] for p in points])
    slope, intercept = np.polyfit(xs, ys, 1)

    predicted_directors = {}
    predicted_companies = {}
    for k in (1, 2):
        frac_hat = math.exp(intercept + slope * math.log(k))
        n_dir = max(0.0, frac_hat * n_directors_at.get(k, 0))
        predicted_directors[k] = n_dir
        predicted_companies[k] = n_dir * k
    return ExtrapolationFit(slope=float(slope), intercept=float(intercept),
                            bound_label=bound_label,
                            predicted_directors=predicted_directors,
                            predicted_companies=predicted_companies)


def estimate_to_json(per_source: list[PosteriorEstimate],
                     combined: CombinedEstimate,
                     shares: list[MarketShare] | None = None,
                     extrapolations: list[ExtrapolationFit] | None = None) -> str:
    doc = {
        "per_source": [s.to_dict() for s in per_source],
        "combined": combined.to_dict(),
    }
    if shares is not None:
        doc["market_shares"] = [s.to_dict() for s in shares]
    if extrapolations is not None:
        doc["extrapolations"] = [e.to_dict() for e in extrapolations]
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
