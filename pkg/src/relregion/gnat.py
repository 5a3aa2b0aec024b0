"""Geometric Near-neighbor Access Tree over an arbitrary metric.

Exact nearest / k-nearest / range queries with Brin-style pruning: every
internal node keeps, for each pivot ``i`` and each sibling subtree ``j``, the
interval of distances from pivot ``i`` to the elements of subtree ``j``.
Removal is lazy; the tree is rebuilt from live elements once more than half
of the stored elements are dead.
"""
from __future__ import annotations

from bisect import insort
from typing import Callable, Dict, Generic, Hashable, List, Tuple, TypeVar

T = TypeVar("T")

# Slack on pruning tests so rounding in the triangle inequality never drops
# a qualifying element.
_SLACK = 1e-9


class DuplicateId(KeyError):
    pass


class UnknownId(KeyError):
    pass


class EmptyIndex(LookupError):
    pass


class _Node:
    __slots__ = ("bucket", "pivots", "children", "ranges")

    def __init__(self):
        self.bucket: List[tuple] = []
        self.pivots: List[tuple] = []
        self.children: List["_Node"] = []
        # ranges[i][j] = [min, max] of d(pivot_i, e) over e in subtree j plus pivot j.
        self.ranges: List[List[List[float]]] = []

    @property
    def is_leaf(self) -> bool:
        return not self.pivots


class GnatIndex(Generic[T]):
    def __init__(self, distance: Callable[[T, T], float], leaf_capacity: int = 50, degree: int = 8,
                 rebuild_fraction: float = 0.5):
        if degree < 2 or leaf_capacity < degree:
            raise ValueError("need degree >= 2 and leaf_capacity >= degree")
        self.distance = distance
        self.leaf_capacity = leaf_capacity
        self.degree = degree
        self.rebuild_fraction = rebuild_fraction
        self._root = _Node()
        # id -> (state, liveness cell); tree elements are (id, state, cell) and
        # removal clears the cell, so a re-inserted id never revives a stale copy.
        self._items: Dict[Hashable, Tuple[T, list]] = {}
        self._dead = 0
        self._stored = 0
        self.distance_evals = 0

    def __len__(self) -> int:
        return len(self._items)

    def size(self) -> int:
        return len(self._items)

    def __contains__(self, ident) -> bool:
        return ident in self._items

    def items(self):
        return ((ident, x) for ident, (x, _) in self._items.items())

    def get(self, ident) -> T:
        return self._items[ident][0]

    # -- mutation ------------------------------------------------------------

    def insert(self, ident, x: T) -> None:
        if ident in self._items:
            raise DuplicateId(ident)
        cell = [True]
        self._items[ident] = (x, cell)
        self._stored += 1
        self._insert((ident, x, cell))

    def _insert(self, elem: tuple) -> None:
        node = self._root
        x = elem[1]
        dist = self.distance
        while not node.is_leaf:
            ds = [dist(p[1], x) for p in node.pivots]
            self.distance_evals += len(ds)
            j = min(range(len(ds)), key=lambda i: (ds[i], i))
            for i, d in enumerate(ds):
                r = node.ranges[i][j]
                if d < r[0]:
                    r[0] = d
                if d > r[1]:
                    r[1] = d
            node = node.children[j]
        node.bucket.append(elem)
        if len(node.bucket) > self.leaf_capacity:
            self._split(node)

    def _split(self, node: _Node) -> None:
        elems = node.bucket
        dist = self.distance
        k = min(self.degree, len(elems))
        # Greedy max-min pivot selection starting from the first element.
        pivots = [0]
        mind = [dist(elems[0][1], e[1]) for e in elems]
        self.distance_evals += len(elems)
        while len(pivots) < k:
            nxt = max(range(len(elems)), key=lambda i: (mind[i], -i))
            if mind[nxt] <= 0.0 and len(pivots) > 1:
                break
            pivots.append(nxt)
            for i, e in enumerate(elems):
                d = dist(elems[nxt][1], e[1])
                if d < mind[i]:
                    mind[i] = d
            self.distance_evals += len(elems)
        pivot_set = set(pivots)
        k = len(pivots)
        node.pivots = [elems[i] for i in pivots]
        node.children = [_Node() for _ in range(k)]
        node.ranges = [[[0.0, 0.0] for _ in range(k)] for _ in range(k)]
        for i in range(k):
            for j in range(k):
                d = dist(node.pivots[i][1], node.pivots[j][1])
                node.ranges[i][j] = [d, d]
        self.distance_evals += k * k
        node.bucket = []
        for idx, e in enumerate(elems):
            if idx in pivot_set:
                continue
            ds = [dist(p[1], e[1]) for p in node.pivots]
            self.distance_evals += k
            j = min(range(k), key=lambda i: (ds[i], i))
            for i, d in enumerate(ds):
                r = node.ranges[i][j]
                if d < r[0]:
                    r[0] = d
                if d > r[1]:
                    r[1] = d
            node.children[j].bucket.append(e)
        for child in node.children:
            if len(child.bucket) > self.leaf_capacity:
                self._split(child)

    def remove(self, ident) -> None:
        if ident not in self._items:
            raise UnknownId(ident)
        _, cell = self._items.pop(ident)
        cell[0] = False
        self._dead += 1
        if self._dead > self.rebuild_fraction * self._stored:
            self.rebuild()

    def rebuild(self) -> None:
        self._root = _Node()
        self._dead = 0
        self._stored = len(self._items)
        for ident, (x, cell) in self._items.items():
            self._insert((ident, x, cell))

    # -- queries -------------------------------------------------------------

    def nearest(self, q: T):
        return self.k_nearest(q, 1)[0]

    def k_nearest(self, q: T, k: int) -> list:
        return [ident for _, ident in self.k_nearest_with_distances(q, k)]

    def k_nearest_with_distances(self, q: T, k: int) -> List[Tuple[float, Hashable]]:
        """Up to ``k`` live ``(distance, id)`` pairs ordered by distance then id."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if not self._items:
            raise EmptyIndex("index is empty")
        best: List[Tuple[float, Hashable]] = []
        self._knn(self._root, q, k, best)
        return best

    def _knn(self, node: _Node, q: T, k: int, best: list) -> None:
        dist = self.distance
        if node.is_leaf:
            n = 0
            for ident, x, cell in node.bucket:
                if cell[0]:
                    d = dist(x, q)
                    n += 1
                    if len(best) < k:
                        insort(best, (d, ident))
                    elif (d, ident) < best[-1]:
                        best.pop()
                        insort(best, (d, ident))
            self.distance_evals += n
            return
        pivots = node.pivots
        ranges = node.ranges
        m = len(pivots)
        alive = [True] * m
        computed: List[Tuple[int, float]] = []
        for i in range(m):
            if not alive[i]:
                continue
            ident, x, cell = pivots[i]
            d = dist(x, q)
            self.distance_evals += 1
            computed.append((i, d))
            if cell[0]:
                if len(best) < k:
                    insort(best, (d, ident))
                elif (d, ident) < best[-1]:
                    best.pop()
                    insort(best, (d, ident))
            if len(best) < k:
                continue
            r = best[-1][0]
            lo, hi = d - r - _SLACK, d + r + _SLACK
            row = ranges[i]
            for j in range(m):
                if alive[j] and (row[j][1] < lo or row[j][0] > hi):
                    alive[j] = False
        dq = dict(computed)
        for j in sorted((j for j in range(m) if alive[j]), key=lambda j: (dq.get(j, 0.0), j)):
            if len(best) >= k:
                r = best[-1][0]
                if any(ranges[i][j][1] < d - r - _SLACK or ranges[i][j][0] > d + r + _SLACK
                       for i, d in computed):
                    continue
            self._knn(node.children[j], q, k, best)

    def range(self, q: T, r: float) -> list:
        """All live ids within distance ``r`` of ``q`` ordered by distance then id."""
        if not self._items:
            return []
        found: List[Tuple[float, object]] = []

        def consider(d: float, ident) -> None:
            if d <= r:
                found.append((d, ident))

        self._search(self._root, q, lambda: r, consider)
        return [ident for _, ident in sorted(found)]

    def _search(self, node: _Node, q: T, radius, consider) -> None:
        dist = self.distance
        if node.is_leaf:
            for ident, x, cell in node.bucket:
                if cell[0]:
                    d = dist(x, q)
                    self.distance_evals += 1
                    consider(d, ident)
            return
        k = len(node.pivots)
        alive = [True] * k
        computed: List[Tuple[int, float]] = []
        for i in range(k):
            if not alive[i]:
                continue
            ident, x, cell = node.pivots[i]
            d = dist(x, q)
            self.distance_evals += 1
            computed.append((i, d))
            if cell[0]:
                consider(d, ident)
            r = radius()
            lo, hi = d - r - _SLACK, d + r + _SLACK
            row = node.ranges[i]
            for j in range(k):
                if alive[j] and (row[j][1] < lo or row[j][0] > hi):
                    alive[j] = False
        dq = dict(computed)
        for j in sorted((j for j in range(k) if alive[j]), key=lambda j: (dq.get(j, 0.0), j)):
            # The radius may have shrunk since the pivot pass.
            r = radius()
            if any(node.ranges[i][j][1] < d - r - _SLACK or node.ranges[i][j][0] > d + r + _SLACK
                   for i, d in computed):
                continue
            self._search(node.children[j], q, radius, consider)
