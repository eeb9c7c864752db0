"""Exact k-d tree over a point matrix.

Queries return exactly the k nearest points by squared Euclidean distance,
with ties broken by ascending point label. Distances are computed with the
same numpy row reduction a brute-force scan would use, so results are
bitwise comparable to a naive scan.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

_LEAF_SIZE = 32


@dataclass
class _Node:
    lo: int
    hi: int  # slice of the permutation array covered by this node
    dim: int = -1
    split: float = 0.0
    left: "_Node | None" = None
    right: "_Node | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class KdTree:
    """Static exact nearest-neighbor index. labels order points for tie-breaks."""

    def __init__(self, points: np.ndarray, labels: list | None = None):
        self.points = np.ascontiguousarray(points, dtype=float)
        n = self.points.shape[0]
        if labels is None:
            labels = list(range(n))
        if len(labels) != n:
            raise ValueError("labels length must match point count")
        self.labels = labels
        self._perm = np.arange(n)
        self.root = self._build(0, n) if n else None

    def __len__(self) -> int:
        return self.points.shape[0]

    def _build(self, lo: int, hi: int) -> _Node:
        node = _Node(lo=lo, hi=hi)
        if hi - lo <= _LEAF_SIZE:
            return node
        idx = self._perm[lo:hi]
        block = self.points[idx]
        spans = block.max(axis=0) - block.min(axis=0)
        dim = int(np.argmax(spans))
        if spans[dim] == 0.0:
            return node  # all points identical on every axis
        order = np.argsort(block[:, dim], kind="stable")
        self._perm[lo:hi] = idx[order]
        mid = (lo + hi) // 2
        node.dim = dim
        node.split = float(self.points[self._perm[mid], dim])
        node.left = self._build(lo, mid)
        node.right = self._build(mid, hi)
        return node

    def query(self, point: np.ndarray, k: int, exclude: int | None = None) -> list[tuple[int, float]]:
        """The k nearest point indices to `point`, ordered by (distance, label).

        exclude: a row index to skip (used for self-exclusion). Returns
        [(row_index, distance)]; fewer than k when the tree is small.
        """
        if self.root is None or k <= 0:
            return []
        point = np.asarray(point, dtype=float)
        # max-heap of the current k best, keyed by (d2, label); heap[0] is the
        # worst kept candidate because we store the negated sort key.
        heap: list[tuple[float, object, int]] = []

        def keep(d2: float, row: int) -> None:
            item = (-d2, _NegKey(self.labels[row]), row)
            if len(heap) < k:
                heapq.heappush(heap, item)
            elif item > heap[0]:
                heapq.heapreplace(heap, item)

        def visit(node: _Node) -> None:
            if node.is_leaf:
                rows = self._perm[node.lo:node.hi]
                d2s = np.sum((self.points[rows] - point) ** 2, axis=1)
                for row, d2 in zip(rows.tolist(), d2s.tolist()):
                    if row != exclude:
                        keep(d2, row)
                return
            near, far = (node.left, node.right) if point[node.dim] <= node.split else (node.right, node.left)
            visit(near)
            gap = point[node.dim] - node.split
            if len(heap) < k or gap * gap <= -heap[0][0]:
                visit(far)

        visit(self.root)
        best = sorted(((-nd2, key.value, row) for nd2, key, row in heap),
                      key=lambda t: (t[0], t[1]))
        return [(row, float(np.sqrt(d2))) for d2, _label, row in best]


class _NegKey:
    """Inverts the ordering of an arbitrary comparable label for max-heap use."""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __lt__(self, other: "_NegKey") -> bool:
        return other.value < self.value

    def __gt__(self, other: "_NegKey") -> bool:
        return other.value > self.value

    def __eq__(self, other) -> bool:
        return isinstance(other, _NegKey) and other.value == self.value
