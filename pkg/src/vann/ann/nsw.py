"""Navigable small-world graph built by incremental insertion.

Points are inserted in a seeded random order; each new point is linked
(undirected) to its approximate nearest existing vertices found with a
beam search.  Early insertions connect far-apart points, supplying the
long-range edges the structure relies on.  Vertex degrees are uncapped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import DistanceCounter, SearchResult, as_dataset, as_query, top_k
from .beam import beam_search


@dataclass
class NswIndex:
    vectors: np.ndarray  # (n, d) float32
    offsets: np.ndarray  # (n + 1,) int64 CSR offsets
    neighbors: np.ndarray  # int32 concatenated adjacency, undirected
    nn: int
    ef_construction: int
    ef_search: int
    entry: int  # random vertex chosen at build time

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def neighbors_of(self, v: int) -> np.ndarray:
        return self.neighbors[self.offsets[v] : self.offsets[v + 1]]

    def search(self, q, k: int, ef_search: int | None = None,
               counter: DistanceCounter | None = None) -> SearchResult:
        return nsw_search(self, q, k, ef_search, counter=counter)


def nsw_build(
    data,
    nn: int = 16,
    ef_construction: int = 256,
    ef_search: int = 128,
    seed: int = 0,
) -> NswIndex:
    data = as_dataset(data)
    if nn < 1:
        raise ValueError("nn must be >= 1")
    if ef_construction < 1 or ef_search < 1:
        raise ValueError("beam widths must be >= 1")
    n = data.shape[0]
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    adj: list[list[int]] = [[] for _ in range(n)]
    entry = int(order[0])

    def get_neighbors(v: int) -> list[int]:
        return adj[v]

    for v in order[1:].tolist():
        _, found = beam_search(
            data, get_neighbors, data[v], [entry], max(ef_construction, nn)
        )
        for u in found[: min(nn, found.size)].tolist():
            adj[v].append(u)
            adj[u].append(v)

    counts = np.fromiter((len(a) for a in adj), dtype=np.int64, count=n)
    offsets = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    flat = np.empty(offsets[-1], dtype=np.int32)
    for v in range(n):
        flat[offsets[v] : offsets[v + 1]] = sorted(adj[v])
    return NswIndex(
        vectors=data,
        offsets=offsets,
        neighbors=flat,
        nn=nn,
        ef_construction=ef_construction,
        ef_search=ef_search,
        entry=entry,
    )


def nsw_search(
    index: NswIndex,
    q,
    k: int,
    ef_search: int | None = None,
    counter: DistanceCounter | None = None,
) -> SearchResult:
    """Best-first beam of width max(ef_search, k) from the entry vertex."""
    qv = as_query(q, index.dim)
    if not 1 <= k <= index.n:
        raise ValueError(f"k must be in [1, {index.n}], got {k}")
    ef = max(index.ef_search if ef_search is None else ef_search, k)
    d2s, ids = beam_search(
        index.vectors, index.neighbors_of, qv, [index.entry], ef, counter=counter
    )
    return top_k(ids, d2s, k)
