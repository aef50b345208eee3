"""Workload profiling: mean distance-kernel calls per query, per index."""

from __future__ import annotations

from ..vusim import WorkloadProfile
from .annoy import AnnoyIndex
from .base import DistanceCounter, FlatIndex, as_dataset
from .hnsw import HnswIndex
from .ivf import IvfFlatIndex
from .nsw import NswIndex
from .pq import IvfPqIndex

ALGORITHM_NAMES = {
    FlatIndex: "flat",
    IvfFlatIndex: "ivfflat",
    IvfPqIndex: "ivfpq",
    NswIndex: "nsw",
    HnswIndex: "hnsw",
    AnnoyIndex: "annoy",
}


def algorithm_name(index) -> str:
    try:
        return ALGORITHM_NAMES[type(index)]
    except KeyError:
        raise TypeError(f"unknown index type {type(index).__name__}") from None


def profile_query(index, queries, k: int, params: dict | None = None) -> WorkloadProfile:
    """Run the queries and average the counted kernel work into a profile.

    For the product-quantized index the work is expressed in chunk-length
    distance calls (its dominant kernel): each full-vector call counts as
    M chunk calls, since both touch the same number of components.  All
    profiles are priced as the squared-L2 kernel; the forest index's
    margin tests are dot products of the same length, so this slightly
    overstates their cost and keeps the estimate an upper bound on work.
    """
    queries = as_dataset(queries)
    params = dict(params or {})
    total = 0.0
    for q in queries:
        counter = DistanceCounter()
        index.search(q, k, counter=counter, **params)
        if isinstance(index, IvfPqIndex):
            total += counter.chunk_calls + counter.calls * index.codebook.M
        else:
            total += counter.calls
    if isinstance(index, IvfPqIndex):
        dim = index.codebook.dsub
    else:
        dim = index.dim
    return WorkloadProfile(
        algorithm=algorithm_name(index),
        dim=dim,
        calls_per_query=total / queries.shape[0],
        kernel="l2",
    )
