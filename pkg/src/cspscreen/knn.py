"""Nearest-neighbor red-flagging of candidate CSP directors.

A director is flagged when it appears among the k nearest neighbors of at
least min_support licensed CSPs in the standardized feature space. Licensed
directors' own support is reported too (they are never flagged themselves).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .features import FeatureMatrix
from .kdtree import KdTree


@dataclass
class NeighborIndex:
    tree: KdTree
    director_ids: list[str]
    row_of: dict[str, int]


def build_index(m: FeatureMatrix) -> NeighborIndex:
    return NeighborIndex(
        tree=KdTree(m.values, labels=m.director_ids),
        director_ids=list(m.director_ids),
        row_of={d: i for i, d in enumerate(m.director_ids)},
    )


def query(idx: NeighborIndex, center: str, k: int = 100) -> list[tuple[str, float]]:
    """k nearest directors to `center`, excluding center itself.

    Ordered by (Euclidean distance, director id). Returns all n-1 when k >= n.
    """
    row = idx.row_of.get(center)
    if row is None:
        raise KeyError(f"director {center!r} not in index")
    hits = idx.tree.query(idx.tree.points[row], k, exclude=row)
    return [(idx.director_ids[r], d) for r, d in hits]


@dataclass
class FlagResult:
    director_id: str
    support: int
    flagged: bool
    is_licensed: bool
    distances: tuple[float, ...] = ()  # distances from the supporting centers


def flag_candidates(
    idx: NeighborIndex,
    licensed: set[str],
    k: int = 100,
    min_support: int = 3,
) -> list[FlagResult]:
    """Support counts for every director neighboring any licensed center.

    flagged <=> support >= min_support and the director is not licensed.
    Results sorted by (-support, director_id).
    """
    missing = licensed - set(idx.row_of)
    if missing:
        raise KeyError(f"licensed directors not in index: {sorted(missing)[:5]}")
    support: dict[str, list[float]] = {}
    for center in sorted(licensed):
        for neighbor, distance in query(idx, center, k):
            support.setdefault(neighbor, []).append(distance)
    results = []
    for director_id in sorted(support):
        distances = support[director_id]
        is_licensed = director_id in licensed
        results.append(FlagResult(
            director_id=director_id,
            support=len(distances),
            flagged=len(distances) >= min_support and not is_licensed,
            is_licensed=is_licensed,
            distances=tuple(distances),
        ))
    results.sort(key=lambda r: (-r.support, r.director_id))
    return results


def flagged_set(results: list[FlagResult]) -> set[str]:
    return {r.director_id for r in results if r.flagged}


def licensed_recall(results: list[FlagResult], licensed: set[str], min_support: int = 3) -> float:
    """Fraction of licensed directors that self-recover at the support threshold."""
    if not licensed:
        return 0.0
    found = sum(1 for r in results if r.is_licensed and r.support >= min_support)
    return found / len(licensed)


@dataclass
class FalseNegativePoint:
    min_support: int
    n_kept: int
    false_negative_rate: float


def false_negative_curve(results: list[FlagResult], licensed: set[str],
                         max_support: int | None = None) -> list[FalseNegativePoint]:
    """Licensed-CSP miss rate and population kept, per support threshold."""
    support_of = {r.director_id: r.support for r in results}
    if max_support is None:
        max_support = max((r.support for r in results), default=1)
    curve = []
    for threshold in range(1, max_support + 1):
        kept = sum(1 for s in support_of.values() if s >= threshold)
        missed = sum(1 for d in licensed if support_of.get(d, 0) < threshold)
        fnr = missed / len(licensed) if licensed else 1.0
        curve.append(FalseNegativePoint(threshold, kept, fnr))
    return curve


def flags_to_csv(results: list[FlagResult]) -> str:
    lines = ["director_id,support,flagged,is_licensed"]
    for r in results:
        lines.append(f"{r.director_id},{r.support},{int(r.flagged)},{int(r.is_licensed)}")
    return "\n".join(lines) + "\n"
