"""Annotation sampling, dual-coder reconciliation, and count extraction.

Scores are 1..5. A director is a CSP when both coders score 4 or 5, a
non-CSP when both score 1 or 2, and Unknown otherwise (any 3, or any
disagreement spanning 3). Records persist in an append-only JSON-lines log;
later submissions by the same coder supersede earlier ones.
"""

from __future__ import annotations

import json
import random
import time
import warnings
from dataclasses import dataclass, field

LABEL_CSP = "CSP"
LABEL_NON_CSP = "NonCSP"
LABEL_UNKNOWN = "Unknown"
LABEL_PENDING = "Pending"

SOURCE_NN = "NN"
SOURCE_LOGIT = "LOGIT"


@dataclass(frozen=True)
class AnnotationRecord:
    director_id: str
    coder_id: str
    score: int
    source: str  # NN | LOGIT
    notes: str | None = None
    timestamp: float = 0.0

    def __post_init__(self):
        if self.score not in (1, 2, 3, 4, 5):
            raise ValueError(f"score must be 1..5, got {self.score}")
        if self.source not in (SOURCE_NN, SOURCE_LOGIT):
            raise ValueError(f"source must be NN or LOGIT, got {self.source!r}")

    def to_json(self) -> str:
        return json.dumps({
            "director_id": self.director_id, "coder_id": self.coder_id,
            "score": self.score, "source": self.source,
            "notes": self.notes, "timestamp": self.timestamp,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "AnnotationRecord":
        raw = json.loads(line)
        return cls(director_id=raw["director_id"], coder_id=raw["coder_id"],
                   score=raw["score"], source=raw["source"],
                   notes=raw.get("notes"), timestamp=raw.get("timestamp", 0.0))


def sample_for_annotation(candidates: set[str], n: int = 100, seed: int = 0) -> list[str]:
    """Uniform sample without replacement, reproducible from the seed.

    When fewer than n candidates exist, returns all of them (with a warning).
    """
    ordered = sorted(candidates)
    if len(ordered) < n:
        warnings.warn(f"only {len(ordered)} candidates for a sample of {n}; taking all")
        n = len(ordered)
    return random.Random(seed).sample(ordered, n)


def reconcile(a: int | None, b: int | None) -> str:
    """Reconciled label from two coders' scores; symmetric in its arguments."""
    if a is None or b is None:
        return LABEL_PENDING
    for score in (a, b):
        if score not in (1, 2, 3, 4, 5):
            raise ValueError(f"score must be 1..5, got {score}")
    lo, hi = min(a, b), max(a, b)
    if lo >= 4:
        return LABEL_CSP
    if hi <= 2:
        return LABEL_NON_CSP
    return LABEL_UNKNOWN


@dataclass
class AnnotationCounts:
    tp: int
    fp: int
    unknown: int
    n_candidates: int
    source: str

    @property
    def sample_size(self) -> int:
        return self.tp + self.fp + self.unknown


class PendingLabelsError(ValueError):
    def __init__(self, pending: list[str]):
        super().__init__(f"directors awaiting a second coder: {pending}")
        self.pending = pending


def counts(labels: dict[str, str], n_candidates: int, source: str) -> AnnotationCounts:
    """TP/FP/Unknown tallies from reconciled labels.

    Unknown labels are carried separately; the estimator feeds only TP and FP
    into the Beta posterior (with an optional sensitivity mode counting
    Unknowns as FP).
    """
    pending = sorted(d for d, label in labels.items() if label == LABEL_PENDING)
    if pending:
        raise PendingLabelsError(pending)
    tp = sum(1 for label in labels.values() if label == LABEL_CSP)
    unknown = sum(1 for label in labels.values() if label == LABEL_UNKNOWN)
    fp = len(labels) - tp - unknown
    return AnnotationCounts(tp=tp, fp=fp, unknown=unknown,
                            n_candidates=n_candidates, source=source)


class AnnotationStore:
    """Event-sourced annotation state: replaying the log reconstructs it exactly.

    One effective record per (director, coder); re-submission supersedes.
    single_coder mode mirrors the sole coder's score for desk testing.
    """

    def __init__(self, log_path=None, single_coder: bool = False):
        self.log_path = log_path
        self.single_coder = single_coder
        self.records: dict[tuple[str, str], AnnotationRecord] = {}
        if log_path is not None:
            try:
                with open(log_path, encoding="utf-8") as fh:
                    for line in fh:
                        if line.strip():
                            self._apply(AnnotationRecord.from_json(line))
            except FileNotFoundError:
                pass

    def _apply(self, record: AnnotationRecord) -> None:
        self.records[(record.director_id, record.coder_id)] = record

    def add(self, record: AnnotationRecord) -> None:
        if record.timestamp == 0.0:
            record = AnnotationRecord(
                director_id=record.director_id, coder_id=record.coder_id,
                score=record.score, source=record.source, notes=record.notes,
                timestamp=time.time())
        self._apply(record)
        if self.log_path is not None:
            with open(self.log_path, "a", encoding="utf-8") as fh:
                fh.write(record.to_json() + "\n")

    def scores_for(self, director_id: str) -> dict[str, int]:
        return {coder: r.score for (did, coder), r in sorted(self.records.items())
                if did == director_id}

    def label_for(self, director_id: str) -> str:
        scores = list(self.scores_for(director_id).values())
        if not scores:
            return LABEL_PENDING
        if len(scores) == 1:
            if self.single_coder:
                return reconcile(scores[0], scores[0])
            return LABEL_PENDING
        # With more than two coders, the two most recent submissions count.
        ordered = sorted(
            ((r.timestamp, r.score) for (did, _c), r in self.records.items()
             if did == director_id), reverse=True)
        return reconcile(ordered[0][1], ordered[1][1])

    def labels(self, directors: list[str]) -> dict[str, str]:
        return {d: self.label_for(d) for d in directors}

    def labeled_directors(self, source: str | None = None) -> set[str]:
        dirs = set()
        for (did, _coder), r in self.records.items():
            if source is None or r.source == source:
                dirs.add(did)
        return dirs

    def coders_for(self, director_id: str) -> set[str]:
        return {coder for (did, coder) in self.records if did == director_id}
