"""Feature-subset robustness sweep for the nearest-neighbor flags.

Each run retains a seeded random 80% of the feature columns, re-standardizes,
rebuilds the index, and re-flags; agreement with the full-feature baseline is
the Jaccard index over flagged non-licensed directors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .features import FeatureMatrix, standardize
from .knn import build_index, flag_candidates


@dataclass
class RobustnessRun:
    run_id: int
    retained_columns: tuple[int, ...]
    # min_support -> flagged set / metric
    flagged: dict[int, set[str]] = field(default_factory=dict)
    licensed_recall: dict[int, float] = field(default_factory=dict)
    agreement: dict[int, float] = field(default_factory=dict)


@dataclass
class RobustnessSummary:
    baseline_flagged: dict[int, set[str]]
    runs: list[RobustnessRun]
    n_retained: int

    def agreement_values(self, min_support: int) -> list[float]:
        return [r.agreement[min_support] for r in self.runs]

    def recall_values(self, min_support: int) -> list[float]:
        return [r.licensed_recall[min_support] for r in self.runs]

    def histogram(self, min_support: int, bins: int = 20) -> dict:
        values = self.agreement_values(min_support)
        counts, edges = np.histogram(values, bins=bins, range=(0.0, 1.0))
        return {"counts": counts.tolist(), "edges": edges.tolist()}

    def to_json(self) -> str:
        doc = {
            "n_runs": len(self.runs),
            "n_retained": self.n_retained,
            "min_supports": sorted(self.baseline_flagged),
            "baseline_flagged_sizes": {
                str(s): len(f) for s, f in self.baseline_flagged.items()},
            "agreement": {str(s): self.agreement_values(s)
                          for s in sorted(self.baseline_flagged)},
            "licensed_recall": {str(s): self.recall_values(s)
                                for s in sorted(self.baseline_flagged)},
            "histograms": {str(s): self.histogram(s)
                           for s in sorted(self.baseline_flagged)},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def jaccard(a: set[str], b: set[str]) -> float:
    """Agreement over flagged sets; two empty sets count as full agreement."""
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def overlap_of_smaller(a: set[str], b: set[str]) -> float:
    if not a or not b:
        return 1.0 if not a and not b else 0.0
    return len(a & b) / min(len(a), len(b))


def _flag_at_thresholds(raw: FeatureMatrix, columns: np.ndarray, licensed: set[str],
                        k: int, min_supports: tuple[int, ...]) -> dict[int, tuple[set[str], float]]:
    sub = FeatureMatrix(
        director_ids=list(raw.director_ids),
        values=raw.values[:, columns],
        feature_names=tuple(raw.feature_names[i] for i in columns),
    )
    std, _stats = standardize(sub)
    idx = build_index(std)
    # Support counts do not depend on min_support; threshold once per setting.
    results = flag_candidates(idx, licensed, k=k, min_support=1)
    support = {r.director_id: r.support for r in results}
    out = {}
    for ms in min_supports:
        flagged = {d for d, s in support.items() if s >= ms and d not in licensed}
        recall = (sum(1 for d in licensed if support.get(d, 0) >= ms) / len(licensed)
                  if licensed else 0.0)
        out[ms] = (flagged, recall)
    return out


def robustness_sweep(
    raw: FeatureMatrix,
    licensed: set[str],
    n_runs: int = 100,
    fraction: float = 0.8,
    k: int = 100,
    min_supports: tuple[int, ...] = (3, 9),
    seed: int = 0,
    metric=jaccard,
) -> RobustnessSummary:
    """Re-flag on seeded random feature subsets and compare to the baseline.

    `raw` is the unstandardized matrix; standardization is recomputed on every
    retained subset.
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError("fraction must be in (0, 1]")
    n_features = raw.values.shape[1]
    n_retained = round(fraction * n_features)
    rng = np.random.default_rng(seed)

    all_columns = np.arange(n_features)
    baseline = _flag_at_thresholds(raw, all_columns, licensed, k, min_supports)
    baseline_flagged = {ms: flagged for ms, (flagged, _r) in baseline.items()}

    runs = []
    for run_id in range(n_runs):
        columns = np.sort(rng.choice(n_features, size=n_retained, replace=False))
        per_threshold = _flag_at_thresholds(raw, columns, licensed, k, min_supports)
        run = RobustnessRun(run_id=run_id, retained_columns=tuple(int(c) for c in columns))
        for ms, (flagged, recall) in per_threshold.items():
            run.flagged[ms] = flagged
            run.licensed_recall[ms] = recall
            run.agreement[ms] = metric(flagged, baseline_flagged[ms])
        runs.append(run)
    return RobustnessSummary(baseline_flagged=baseline_flagged, runs=runs,
                             n_retained=n_retained)
