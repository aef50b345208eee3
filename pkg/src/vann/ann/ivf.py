"""Inverted-file index over a k-means coarse partition (full vectors stored)."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..kernels import l2_squared_to_many
from .base import DistanceCounter, SearchResult, as_dataset, as_query, top_k
from .kmeans import KMeansModel, kmeans_fit


def default_nlist(n: int) -> int:
    """Cell count heuristic for datasets below a million vectors: 4 sqrt(N),
    floored and clamped into [1, n]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return max(1, min(n, math.floor(4.0 * math.sqrt(n))))


def build_cell_lists(assignment: np.ndarray, ncent: int) -> tuple[np.ndarray, np.ndarray]:
    """CSR layout of the inverted lists: ids grouped by cell, ascending
    within each cell."""
    order = np.argsort(assignment, kind="stable").astype(np.int64)
    counts = np.bincount(assignment, minlength=ncent)
    offsets = np.zeros(ncent + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    return offsets, order


@dataclass
class IvfFlatIndex:
    kmeans: KMeansModel
    vectors: np.ndarray  # (n, d) float32
    list_offsets: np.ndarray  # (nlist + 1,) int64
    list_ids: np.ndarray  # (n,) int64

    @property
    def nlist(self) -> int:
        return self.kmeans.ncent

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def cell_ids(self, cell: int) -> np.ndarray:
        return self.list_ids[self.list_offsets[cell] : self.list_offsets[cell + 1]]

    def search(self, q, k: int, nprobe: int = 8, counter: DistanceCounter | None = None):
        return ivfflat_search(self, q, k, nprobe, counter=counter)


def ivfflat_build(data, nlist: int, seed: int = 0, iters: int = 25) -> IvfFlatIndex:
    """Cluster the dataset into nlist cells and file every vector under its
    nearest centroid."""
    data = as_dataset(data)
    model = kmeans_fit(data, nlist, iters=iters, seed=seed)
    offsets, ids = build_cell_lists(model.assignment, nlist)
    return IvfFlatIndex(kmeans=model, vectors=data, list_offsets=offsets, list_ids=ids)


def probe_cells(centroids: np.ndarray, qv: np.ndarray, nprobe: int) -> np.ndarray:
    """The nprobe nearest cells, ties broken by smaller cell id."""
    d2 = l2_squared_to_many(centroids, qv)
    return np.lexsort((np.arange(len(centroids)), d2))[:nprobe]


def ivfflat_search(
    index: IvfFlatIndex,
    q,
    k: int,
    nprobe: int,
    counter: DistanceCounter | None = None,
) -> SearchResult:
    """Exact k-NN restricted to the nprobe cells nearest the query."""
    qv = as_query(q, index.dim)
    if not 1 <= k <= index.n:
        raise ValueError(f"k must be in [1, {index.n}], got {k}")
    if not 1 <= nprobe <= index.nlist:
        raise ValueError(f"nprobe must be in [1, {index.nlist}], got {nprobe}")
    cells = probe_cells(index.kmeans.centroids, qv, nprobe)
    if counter is not None:
        counter.add(index.nlist)
    cand = np.concatenate([index.cell_ids(c) for c in cells])
    if cand.size == 0:
        return SearchResult(
            ids=np.empty(0, dtype=np.int64), distances=np.empty(0, dtype=np.float64)
        )
    d2 = l2_squared_to_many(index.vectors[cand], qv)
    if counter is not None:
        counter.add(cand.size)
    return top_k(cand, d2, k)
