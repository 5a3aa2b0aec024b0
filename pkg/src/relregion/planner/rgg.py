"""Random geometric graph construction and the lazy reverse search.

Every element links to its ``k`` nearest other elements, ordered by
(distance, id), and the graph is the symmetric closure of those links.
``build_rgg`` answers this with one index query per element;
``KnnGraph`` maintains the same graph across batches with vectorized
distances, touching only rows that can change.
"""
from __future__ import annotations

from typing import Dict, Iterable, List, Mapping, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from relregion.gnat import GnatIndex
from relregion.planner.common import INF, rgg_k

Graph = Dict[int, Dict[int, float]]

# Cap on distance-matrix cells computed per block.
_BLOCK_CELLS = 1 << 21


def neighbor_count(n: int, dimension: int, k_rgg: float = 1.0) -> int:
    return min(rgg_k(n, dimension, k_rgg), max(n - 1, 0))


def build_rgg(index: GnatIndex, dimension: int, k_rgg: float = 1.0) -> Graph:
    """Symmetric k-nearest graph over every element of ``index``, weighted by the metric."""
    n = index.size()
    k = neighbor_count(n, dimension, k_rgg)
    graph: Graph = {ident: {} for ident, _ in index.items()}
    if k == 0:
        return graph
    for ident, x in index.items():
        near = [(d, other) for d, other in index.k_nearest_with_distances(x, k + 1) if other != ident]
        for d, other in near[:k]:
            graph[ident][other] = d
            graph[other][ident] = d
    return graph


class KnnGraph:
    """Incrementally maintained k-nearest graph over a changing sample set.

    ``update`` takes the current ``{id: state}`` map.  Rows of surviving
    elements are merged against the newcomers only; rows that lost a
    neighbor, rows of new elements, and every row after ``k`` changes are
    recomputed against the whole set.  Each row holds exactly ``k``
    neighbors ordered by (distance, id).
    """

    def __init__(self, space, dimension: int, k_rgg: float = 1.0):
        self.space = space
        self.dimension = dimension
        self.k_rgg = k_rgg
        self.k = -1
        self.ids = np.zeros(0, dtype=np.int64)
        self.dist = np.zeros((0, 0))
        self.nbr = np.zeros((0, 0), dtype=np.int64)

    @property
    def rows(self) -> Dict[int, List[Tuple[float, int]]]:
        return {i: list(zip(d, o)) for i, d, o in zip(self.ids.tolist(), self.dist.tolist(), self.nbr.tolist())}

    def update(self, states: Mapping[int, object]) -> "KnnGraph":
        ids = np.asarray(sorted(states), dtype=np.int64)
        n = len(ids)
        k = neighbor_count(n, self.dimension, self.k_rgg)
        packed = self.space.pack([states[i] for i in ids.tolist()])
        dist = np.zeros((n, max(k, 0)))
        nbr = np.zeros((n, max(k, 0)), dtype=np.int64)
        if k > 0:
            old = np.isin(ids, self.ids)
            if k != self.k:
                full = np.ones(n, dtype=bool)
            else:
                src = np.searchsorted(self.ids, ids[old])
                dist[old], nbr[old] = self.dist[src], self.nbr[src]
                lost = np.zeros(n, dtype=bool)
                lost[old] = ~np.isin(nbr[old], ids).all(axis=1)
                full = ~old | lost
            fresh = np.flatnonzero(~old)
            self._full_rows(np.flatnonzero(full), ids, packed, k, dist, nbr)
            self._merge_rows(np.flatnonzero(~full), fresh, ids, packed, k, dist, nbr)
        self.ids, self.dist, self.nbr, self.k = ids, dist, nbr, k
        return self

    def links(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Directed k-nearest links as (owner ids, neighbor ids, distances)."""
        k = self.nbr.shape[1]
        return np.repeat(self.ids, k), self.nbr.ravel(), self.dist.ravel()

    def as_dict(self) -> Graph:
        graph: Graph = {i: {} for i in self.ids.tolist()}
        for a, b, d in zip(*(x.tolist() for x in self.links())):
            graph[a][b] = d
            graph[b][a] = d
        return graph

    def _block(self, packed, idx: np.ndarray, cols: np.ndarray) -> np.ndarray:
        return self.space.pairwise(tuple(a[idx] for a in packed), tuple(a[cols] for a in packed))

    def _full_rows(self, full, ids, packed, k, dist, nbr) -> None:
        if not len(full):
            return
        n = len(ids)
        all_cols = np.arange(n)
        step = max(1, _BLOCK_CELLS // n)
        for start in range(0, len(full), step):
            chunk = full[start:start + step]
            block = self._block(packed, chunk, all_cols)
            block[np.arange(len(chunk)), chunk] = np.inf
            part = np.argpartition(block, k - 1, axis=1)[:, :k]
            vals = np.take_along_axis(block, part, axis=1)
            # A tie at the k-th distance needs the id order, which
            # argpartition does not respect; those rows take a stable sort.
            tied = (block <= vals.max(axis=1)[:, None]).sum(axis=1) > k
            if tied.any():
                part[tied] = np.argsort(block[tied], axis=1, kind="stable")[:, :k]
                vals[tied] = np.take_along_axis(block[tied], part[tied], axis=1)
            # Columns are id-ordered, so the column index breaks ties by id.
            order = np.lexsort((part, vals), axis=-1)
            dist[chunk] = np.take_along_axis(vals, order, axis=1)
            nbr[chunk] = ids[np.take_along_axis(part, order, axis=1)]

    def _merge_rows(self, merge, fresh, ids, packed, k, dist, nbr) -> None:
        if not len(merge) or not len(fresh):
            return
        new_ids = ids[fresh]
        step = max(1, _BLOCK_CELLS // len(fresh))
        for start in range(0, len(merge), step):
            chunk = merge[start:start + step]
            block = self._block(packed, chunk, fresh)
            d = np.concatenate([dist[chunk], block], axis=1)
            o = np.concatenate([nbr[chunk], np.broadcast_to(new_ids, block.shape)], axis=1)
            order = np.lexsort((o, d), axis=-1)[:, :k]
            dist[chunk] = np.take_along_axis(d, order, axis=1)
            nbr[chunk] = np.take_along_axis(o, order, axis=1)


class CsrGraph:
    """Symmetric weighted graph over sample ids in compressed-row form."""

    def __init__(self, ids: np.ndarray, indptr: np.ndarray, nbr: np.ndarray, weight: np.ndarray):
        self.ids = ids
        self.indptr = indptr
        self.nbr = nbr
        self.weight = weight
        self.pos = {ident: i for i, ident in enumerate(ids.tolist())}
        self._ptr = indptr.tolist()
        self._nbr = nbr.tolist()
        self._w = weight.tolist()

    @classmethod
    def assemble(cls, ids, parts, drop=()) -> "CsrGraph":
        """Union of edge lists ``(a, b, w)``; the first listed weight of a pair wins.

        ``drop`` holds pairs to leave out.  Pairs touching an id not in
        ``ids`` are ignored.
        """
        ids = np.asarray(sorted(ids), dtype=np.int64)
        span = int(ids[-1]) + 1 if len(ids) else 1
        a = np.concatenate([np.asarray(p[0], dtype=np.int64) for p in parts] + [np.zeros(0, np.int64)])
        b = np.concatenate([np.asarray(p[1], dtype=np.int64) for p in parts] + [np.zeros(0, np.int64)])
        w = np.concatenate([np.asarray(p[2], dtype=float) for p in parts] + [np.zeros(0)])
        live = np.isin(a, ids) & np.isin(b, ids) & (a != b)
        a, b, w = a[live], b[live], w[live]
        lo, hi = np.minimum(a, b), np.maximum(a, b)
        key = lo * span + hi
        key, first = np.unique(key, return_index=True)
        lo, hi, w = lo[first], hi[first], w[first]
        drop = list(drop)
        if drop:
            d = np.asarray(drop, dtype=np.int64).reshape(-1, 2)
            dkey = np.minimum(d[:, 0], d[:, 1]) * span + np.maximum(d[:, 0], d[:, 1])
            keep = ~np.isin(key, dkey)
            lo, hi, w = lo[keep], hi[keep], w[keep]
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        ww = np.concatenate([w, w])
        row = np.searchsorted(ids, src)
        order = np.lexsort((dst, row))
        row, dst, ww = row[order], dst[order], ww[order]
        indptr = np.concatenate(([0], np.cumsum(np.bincount(row, minlength=len(ids)))))
        return cls(ids, indptr, dst, ww)

    @classmethod
    def from_dict(cls, graph: Graph) -> "CsrGraph":
        a = [x for x, nb in graph.items() for _ in nb]
        b = [y for nb in graph.values() for y in nb]
        w = [d for nb in graph.values() for d in nb.values()]
        return cls.assemble(list(graph), [(a, b, w)])

    def neighbors(self, ident: int):
        p = self.pos[ident]
        lo, hi = self._ptr[p], self._ptr[p + 1]
        return zip(self._nbr[lo:hi], self._w[lo:hi])

    def as_dict(self) -> Graph:
        return {ident: dict(self.neighbors(ident)) for ident in self.pos}


def reverse_search(graph, goals: Iterable[int]) -> Tuple[Dict[int, float], Dict[int, int]]:
    """Multi-source Dijkstra from the goal ids; no edge is collision checked.

    ``graph`` is a ``CsrGraph`` or an adjacency dict.  Returns cost-to-go
    labels and, for every reached non-goal id, its successor toward the
    goal.  Unreached ids are absent from both maps.
    """
    if not isinstance(graph, CsrGraph):
        graph = CsrGraph.from_dict(graph)
    ids = graph.ids.tolist()
    sources = sorted({graph.pos[g] for g in goals})
    if not sources:
        return {}, {}
    n = len(ids)
    # Explicit zeros stay edges in csgraph, so coincident states keep their link.
    mat = csr_matrix((graph.weight, np.searchsorted(graph.ids, graph.nbr), graph.indptr), shape=(n, n))
    dist, pred, _ = dijkstra(mat, directed=True, indices=sources, min_only=True, return_predecessors=True)
    out: Dict[int, float] = {}
    succ: Dict[int, int] = {}
    for i in np.flatnonzero(np.isfinite(dist)).tolist():
        out[ids[i]] = float(dist[i])
        if pred[i] >= 0:
            succ[ids[i]] = ids[pred[i]]
    return out, succ


def label(dist: Dict[int, float], ident: int) -> float:
    return dist.get(ident, INF)
