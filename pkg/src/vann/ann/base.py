"""Shared search primitives: datasets, results, instrumentation, exact k-NN."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..kernels import l2_squared_to_many


def as_dataset(x) -> np.ndarray:
    """Coerce to a (n, d) float32 matrix and validate it."""
    arr = np.ascontiguousarray(x, dtype=np.float32)
    if arr.ndim != 2:
        raise ValueError(f"dataset must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError("dataset needs at least one vector and one dimension")
    if not np.all(np.isfinite(arr)):
        raise ValueError("dataset contains non-finite values")
    return arr


def as_query(q, dim: int) -> np.ndarray:
    """Coerce a query to a float32 vector of the expected dimension."""
    v = np.ascontiguousarray(q, dtype=np.float32)
    if v.ndim != 1 or v.size != dim:
        raise ValueError(f"query must be a vector of dimension {dim}, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("query contains non-finite values")
    return v


@dataclass
class DistanceCounter:
    """Per-query tally of distance-kernel work.

    calls counts full-vector kernel invocations (squared L2 or dot);
    chunk_calls counts the sub-vector distance-table computations the
    product-quantized index performs (one per chunk/centroid pair).
    """

    calls: int = 0
    chunk_calls: int = 0

    def add(self, n: int) -> None:
        self.calls += int(n)

    def add_chunks(self, n: int) -> None:
        self.chunk_calls += int(n)


@dataclass
class SearchResult:
    """k-NN answer: ids with their (non-decreasing) squared distances."""

    ids: np.ndarray
    distances: np.ndarray

    def __len__(self) -> int:
        return len(self.ids)


def top_k(ids: np.ndarray, d2: np.ndarray, k: int) -> SearchResult:
    """Select the k smallest distances, ties broken by smaller id."""
    order = np.lexsort((ids, d2))[:k]
    return SearchResult(
        ids=np.asarray(ids, dtype=np.int64)[order],
        distances=np.asarray(d2, dtype=np.float64)[order],
    )


def recall(result_ids, truth_ids) -> float:
    """Fraction of the true neighbors present in the returned set."""
    truth = set(int(i) for i in truth_ids)
    if not truth:
        raise ValueError("truth set is empty")
    hits = sum(1 for i in result_ids if int(i) in truth)
    return hits / len(truth)


def exact_knn(
    data: np.ndarray,
    q,
    k: int,
    counter: DistanceCounter | None = None,
) -> SearchResult:
    """Exhaustive k nearest neighbors by squared L2 distance."""
    data = as_dataset(data)
    n = data.shape[0]
    qv = as_query(q, data.shape[1])
    if not 1 <= k <= n:
        raise ValueError(f"k must be in [1, {n}], got {k}")
    d2 = l2_squared_to_many(data, qv)
    if counter is not None:
        counter.add(n)
    return top_k(np.arange(n, dtype=np.int64), d2, k)


@dataclass
class FlatIndex:
    """Exhaustive-scan index: stores the vectors, answers exactly."""

    vectors: np.ndarray

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def search(self, q, k: int, counter: DistanceCounter | None = None) -> SearchResult:
        return exact_knn(self.vectors, q, k, counter=counter)


def flat_build(data) -> FlatIndex:
    return FlatIndex(vectors=as_dataset(data))
