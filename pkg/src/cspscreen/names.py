"""Character-trigram TF-IDF cosine similarity for name matching.

Scheme: TF = raw trigram count, IDF = ln((1+N)/(1+df)) + 1, L2-normalized
vectors. Names are lowercased, punctuation-stripped and padded with one
boundary space so 1-2 character tokens still yield trigrams.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

_PUNCT_RE = re.compile(r"[^0-9a-zÀ-ɏ]+")


def normalize_name(raw: str) -> str:
    """Lowercase, map punctuation to spaces, collapse whitespace, pad."""
    cleaned = _PUNCT_RE.sub(" ", raw.lower()).strip()
    cleaned = re.sub(r"\s+", " ", cleaned)
    if not cleaned:
        return " "
    return f" {cleaned} "


def trigrams(padded: str) -> list[str]:
    return [padded[i:i + 3] for i in range(len(padded) - 2)]


@dataclass(frozen=True)
class TrigramVocabulary:
    index: dict[str, int]  # trigram -> dense index
    document_frequencies: dict[str, int]
    n_documents: int

    def idf(self, trigram: str) -> float:
        df = self.document_frequencies.get(trigram, 0)
        return math.log((1 + self.n_documents) / (1 + df)) + 1.0


def fit_vocabulary(names: list[str]) -> TrigramVocabulary:
    if not names:
        raise ValueError("cannot fit a vocabulary on an empty name list")
    df: dict[str, int] = {}
    for name in names:
        for gram in set(trigrams(normalize_name(name))):
            df[gram] = df.get(gram, 0) + 1
    index = {gram: i for i, gram in enumerate(sorted(df))}
    return TrigramVocabulary(index=index, document_frequencies=df, n_documents=len(names))


def vectorize(name: str, vocab: TrigramVocabulary) -> dict[int, float]:
    """Sparse L2-normalized TF-IDF vector. Out-of-vocabulary trigrams are dropped."""
    counts: dict[int, int] = {}
    for gram in trigrams(normalize_name(name)):
        idx = vocab.index.get(gram)
        if idx is not None:
            counts[idx] = counts.get(idx, 0) + 1
    if not counts:
        return {}
    grams = {i: g for g, i in vocab.index.items()}
    weights = {i: c * vocab.idf(grams[i]) for i, c in counts.items()}
    norm = math.sqrt(sum(w * w for w in weights.values()))
    return {i: w / norm for i, w in weights.items()}


def cosine(a: dict[int, float], b: dict[int, float]) -> float:
    """Cosine similarity in [0, 1]; an empty vector scores 0 against anything."""
    if not a or not b:
        return 0.0
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b.get(i, 0.0) for i, w in a.items())
    na = math.sqrt(sum(w * w for w in a.values()))
    nb = math.sqrt(sum(w * w for w in b.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, max(0.0, dot / (na * nb)))


class NameSimilarity:
    """Vocabulary plus a vector cache, fit once over all dataset names."""

    def __init__(self, names: list[str]):
        self.vocab = fit_vocabulary(names)
        self._cache: dict[str, dict[int, float]] = {}
        self._pair_cache: dict[tuple[str, str], float] = {}

    def vector(self, name: str) -> dict[int, float]:
        vec = self._cache.get(name)
        if vec is None:
            vec = vectorize(name, self.vocab)
            self._cache[name] = vec
        return vec

    def similarity(self, a: str, b: str) -> float:
        key = (a, b) if a <= b else (b, a)
        score = self._pair_cache.get(key)
        if score is None:
            score = cosine(self.vector(a), self.vector(b))
            self._pair_cache[key] = score
        return score


def match_names(
    queries: list[str],
    targets: list[str],
    threshold: float = 0.90,
) -> list[tuple[str, str, float]]:
    """All (query, target) pairs with cosine >= threshold.

    Sorted descending by similarity, ties broken by (query, target) order.
    The vocabulary is fit over the union of both lists.
    """
    if not (0.0 < threshold <= 1.0):
        raise ValueError("threshold must be in (0, 1]")
    if not queries or not targets:
        return []
    sim = NameSimilarity(sorted(set(queries) | set(targets)))
    pairs: list[tuple[str, str, float]] = []
    for q in queries:
        qv = sim.vector(q)
        if not qv:
            continue
        for t in targets:
            s = cosine(qv, sim.vector(t))
            if s >= threshold:
                pairs.append((q, t, s))
    pairs.sort(key=lambda p: (-p[2], p[0], p[1]))
    return pairs
