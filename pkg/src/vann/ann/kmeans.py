"""Seeded k-means with k-means++ initialization and empty-cluster repair."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import as_dataset


@dataclass
class KMeansModel:
    """Centroids plus the nearest-centroid assignment of every input vector."""

    centroids: np.ndarray  # (ncent, d) float32
    assignment: np.ndarray  # (n,) int32

    @property
    def ncent(self) -> int:
        return self.centroids.shape[0]


def _pairwise_d2(data64: np.ndarray, centroids64: np.ndarray) -> np.ndarray:
    # ||x||^2 - 2 x.c + ||c||^2, clipped at zero against rounding.
    d2 = (
        np.sum(data64 * data64, axis=1)[:, None]
        - 2.0 * data64 @ centroids64.T
        + np.sum(centroids64 * centroids64, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _plusplus_seed(data64: np.ndarray, ncent: int, rng: np.random.Generator) -> np.ndarray:
    n = data64.shape[0]
    chosen = np.empty(ncent, dtype=np.int64)
    chosen[0] = rng.integers(n)
    d2 = np.sum((data64 - data64[chosen[0]]) ** 2, axis=1)
    taken = np.zeros(n, dtype=bool)
    taken[chosen[0]] = True
    for i in range(1, ncent):
        total = d2.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=d2 / total))
        else:
            # Remaining points duplicate the chosen ones; take the smallest
            # untaken id so ncent == n still yields distinct centroids.
            idx = int(np.flatnonzero(~taken)[0])
        chosen[i] = idx
        taken[idx] = True
        d2 = np.minimum(d2, np.sum((data64 - data64[idx]) ** 2, axis=1))
    return data64[chosen].copy()


def _repair_empty(assignment: np.ndarray, d2_own: np.ndarray, ncent: int) -> np.ndarray:
    """Give every empty cluster the farthest point of the largest cluster."""
    counts = np.bincount(assignment, minlength=ncent)
    for empty in np.flatnonzero(counts == 0):
        donor = int(np.argmax(counts))
        members = np.flatnonzero(assignment == donor)
        far = members[int(np.argmax(d2_own[members]))]
        assignment[far] = empty
        d2_own[far] = 0.0
        counts[donor] -= 1
        counts[empty] += 1
    return assignment


def kmeans_fit(data, ncent: int, iters: int = 25, seed: int = 0) -> KMeansModel:
    """Lloyd iterations from a k-means++ start; deterministic per seed.

    Empty clusters are repaired by splitting the largest cluster at its
    farthest member.  The returned assignment is recomputed against the
    final centroids, so every vector maps to its nearest one.
    """
    data = as_dataset(data)
    n = data.shape[0]
    if not 1 <= ncent <= n:
        raise ValueError(f"ncent must be in [1, {n}], got {ncent}")
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.default_rng(seed)
    data64 = data.astype(np.float64)
    centroids = _plusplus_seed(data64, ncent, rng)

    assignment = np.zeros(n, dtype=np.int32)
    for _ in range(iters):
        d2 = _pairwise_d2(data64, centroids)
        new_assignment = np.argmin(d2, axis=1).astype(np.int32)
        new_assignment = _repair_empty(
            new_assignment, d2[np.arange(n), new_assignment], ncent
        )
        converged = bool(np.array_equal(new_assignment, assignment))
        assignment = new_assignment
        for c in range(ncent):
            members = assignment == c
            if members.any():
                centroids[c] = data64[members].mean(axis=0)
        if converged:
            break

    d2 = _pairwise_d2(data64, centroids)
    assignment = np.argmin(d2, axis=1).astype(np.int32)
    return KMeansModel(
        centroids=centroids.astype(np.float32),
        assignment=assignment,
    )


def distortion(data, model: KMeansModel) -> float:
    """Within-cluster sum of squared distances under the model's assignment."""
    data = as_dataset(data).astype(np.float64)
    cents = model.centroids.astype(np.float64)[model.assignment]
    return float(np.sum((data - cents) ** 2))
