"""Best-first beam search over a neighborhood graph."""

from __future__ import annotations

import heapq

import numpy as np

from ..kernels import l2_squared_to_many
from .base import DistanceCounter


def beam_search(
    vectors: np.ndarray,
    get_neighbors,
    qv: np.ndarray,
    entries,
    ef: int,
    counter: DistanceCounter | None = None,
    visited: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Expand the graph best-first from the entry vertices, keeping the ef
    closest visited vertices; returns (distances, ids) sorted by
    (distance, id).

    With ef >= number of reachable vertices nothing is ever pruned, so the
    result is the exhaustive scan of the connected component.
    """
    if ef < 1:
        raise ValueError("ef must be >= 1")
    if visited is None:
        visited = np.zeros(vectors.shape[0], dtype=bool)
    cand: list[tuple[float, int]] = []  # min-heap of (d2, id)
    top: list[tuple[float, int]] = []  # max-heap of (-d2, -id), size <= ef

    def offer(ids: np.ndarray) -> None:
        ids = ids[~visited[ids]]
        if ids.size == 0:
            return
        visited[ids] = True
        d2 = l2_squared_to_many(vectors[ids], qv)
        if counter is not None:
            counter.add(ids.size)
        if len(top) >= ef:
            # Cheap pre-filter against the current worst; the per-node check
            # below stays exact as the heap tightens mid-batch.
            worst_d, worst_id = -top[0][0], -top[0][1]
            keep = (d2 < worst_d) | ((d2 == worst_d) & (ids < worst_id))
            ids, d2 = ids[keep], d2[keep]
        for dist, node in zip(d2.tolist(), ids.tolist()):
            if len(top) < ef:
                heapq.heappush(top, (-dist, -node))
                heapq.heappush(cand, (dist, node))
            else:
                worst_d, worst_id = -top[0][0], -top[0][1]
                if (dist, node) < (worst_d, worst_id):
                    heapq.heapreplace(top, (-dist, -node))
                    heapq.heappush(cand, (dist, node))

    offer(np.unique(np.asarray(list(entries), dtype=np.int64)))
    while cand:
        dist, node = heapq.heappop(cand)
        if len(top) >= ef and dist > -top[0][0]:
            break
        offer(np.asarray(get_neighbors(node), dtype=np.int64))

    ordered = sorted((-d, -i) for d, i in top)
    ids = np.array([i for _, i in ordered], dtype=np.int64)
    d2s = np.array([d for d, _ in ordered], dtype=np.float64)
    return d2s, ids
