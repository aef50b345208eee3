"""Hierarchical small-world graph: nested layers searched top-down.

Every point lives on layer 0; a point with level L also appears on
layers 1..L, so vertex sets nest.  Queries descend greedily (beam
width 1) from the entry point through the upper layers and run a full
beam only on layer 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..kernels import l2_squared_to_many
from .base import DistanceCounter, SearchResult, as_dataset, as_query, top_k
from .beam import beam_search

_EMPTY = np.empty(0, dtype=np.int32)

LEVEL_SCHEMES = ("geometric", "equal")


def hnsw_assign_level(rng: np.random.Generator, M: int) -> int:
    """Draw one vertex level: geometric decay with P(level >= 1) = 1/M."""
    if M < 2:
        return 0
    u = 1.0 - rng.random()  # (0, 1]; avoids log(0)
    return int(-math.log(u) / math.log(M))


def _levels_geometric(n: int, M: int, rng: np.random.Generator) -> np.ndarray:
    if M < 2:
        return np.zeros(n, dtype=np.int32)
    u = 1.0 - rng.random(n)
    return np.floor(-np.log(u) / math.log(M)).astype(np.int32)


def _levels_equal(n: int, M: int, rng: np.random.Generator) -> np.ndarray:
    # Random division into near-equal parts, one part per level; the part
    # count grows like log_M(n) so the hierarchy height matches the
    # geometric scheme.
    if M < 2 or n < 2:
        return np.zeros(n, dtype=np.int32)
    parts = max(1, int(math.log(n) / math.log(M)) + 1)
    base, rem = divmod(n, parts)
    levels = np.repeat(
        np.arange(parts, dtype=np.int32),
        [base + (1 if lvl < rem else 0) for lvl in range(parts)],
    )
    return levels[rng.permutation(n)]


def _select_neighbors(
    data: np.ndarray,
    center: np.ndarray,
    cand_d2: np.ndarray,
    cand_ids: np.ndarray,
    M: int,
) -> np.ndarray:
    """Diversity-aware neighbor selection: take a candidate only when it is
    closer to the center than to every neighbor already taken, so links
    spread across directions and components stay bridged; backfill with the
    nearest discarded candidates if fewer than M survive."""
    if cand_ids.size <= M:
        return cand_ids
    selected: list[int] = []
    discarded: list[int] = []
    for dist, node in zip(cand_d2.tolist(), cand_ids.tolist()):
        if len(selected) == M:
            break
        if not selected:
            selected.append(node)
            continue
        d_to_sel = l2_squared_to_many(data[selected], data[node])
        if dist < d_to_sel.min():
            selected.append(node)
        else:
            discarded.append(node)
    for node in discarded:
        if len(selected) == M:
            break
        selected.append(node)
    return np.asarray(selected, dtype=np.int64)


@dataclass
class HnswIndex:
    vectors: np.ndarray  # (n, d) float32
    layer_offsets: list[np.ndarray]  # per layer: (n + 1,) int64 CSR offsets
    layer_neighbors: list[np.ndarray]  # per layer: int32 adjacency
    levels: np.ndarray  # (n,) int32 top layer per vertex
    entry: int
    M: int

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    @property
    def top_level(self) -> int:
        return len(self.layer_offsets) - 1

    def neighbors_of(self, layer: int, v: int) -> np.ndarray:
        offs = self.layer_offsets[layer]
        return self.layer_neighbors[layer][offs[v] : offs[v + 1]]

    def layer_members(self, layer: int) -> np.ndarray:
        return np.flatnonzero(self.levels >= layer)

    def search(self, q, k: int, ef_search: int = 128,
               counter: DistanceCounter | None = None) -> SearchResult:
        return hnsw_search(self, q, k, ef_search, counter=counter)


def hnsw_build(
    data,
    M: int = 16,
    ef_construction: int = 256,
    seed: int = 0,
    level_scheme: str = "geometric",
    levels: np.ndarray | None = None,
) -> HnswIndex:
    """Insert points in dataset order, linking each to M vertices per layer
    chosen by diversity-aware selection; overfull neighbor lists are pruned
    with the same rule.

    ``levels`` overrides the random level assignment, e.g. to force a
    single-layer graph.
    """
    data = as_dataset(data)
    if M < 1:
        raise ValueError("M must be >= 1")
    if ef_construction < 1:
        raise ValueError("ef_construction must be >= 1")
    n = data.shape[0]
    rng = np.random.default_rng(seed)
    if levels is None:
        if level_scheme not in LEVEL_SCHEMES:
            raise ValueError(f"level_scheme must be one of {LEVEL_SCHEMES}")
        if level_scheme == "geometric":
            levels = _levels_geometric(n, M, rng)
        else:
            levels = _levels_equal(n, M, rng)
    else:
        levels = np.asarray(levels, dtype=np.int32)
        if levels.shape != (n,) or levels.min() < 0:
            raise ValueError("levels must be n non-negative integers")

    max_level = int(levels.max())
    adj: list[dict[int, np.ndarray]] = [{} for _ in range(max_level + 1)]
    entry = -1
    top = -1

    for v in range(n):
        lvl = int(levels[v])
        for layer in range(lvl + 1):
            adj[layer][v] = _EMPTY
        if entry < 0:
            entry, top = v, lvl
            continue

        qv = data[v]
        cur = [entry]
        for layer in range(top, lvl, -1):
            _, found = beam_search(data, adj[layer].__getitem__, qv, cur, 1)
            cur = found.tolist()
        for layer in range(min(lvl, top), -1, -1):
            found_d2, found = beam_search(data, adj[layer].__getitem__, qv, cur, ef_construction)
            links = _select_neighbors(data, qv, found_d2, found, M)
            adj[layer][v] = links.astype(np.int32)
            for u in links.tolist():
                row = np.append(adj[layer][u], np.int32(v))
                if row.size > M:
                    d2 = l2_squared_to_many(data[row], data[u])
                    order = np.lexsort((row, d2))
                    row = _select_neighbors(
                        data, data[u], d2[order], row[order].astype(np.int64), M
                    ).astype(np.int32)
                    row.sort()
                adj[layer][u] = row
            cur = found.tolist()
        if lvl > top:
            entry, top = v, lvl

    layer_offsets: list[np.ndarray] = []
    layer_neighbors: list[np.ndarray] = []
    for layer in range(max_level + 1):
        offsets = np.zeros(n + 1, dtype=np.int64)
        rows = adj[layer]
        counts = np.zeros(n, dtype=np.int64)
        for v, row in rows.items():
            counts[v] = row.size
        np.cumsum(counts, out=offsets[1:])
        flat = np.empty(offsets[-1], dtype=np.int32)
        for v, row in rows.items():
            flat[offsets[v] : offsets[v + 1]] = np.sort(row)
        layer_offsets.append(offsets)
        layer_neighbors.append(flat)

    return HnswIndex(
        vectors=data,
        layer_offsets=layer_offsets,
        layer_neighbors=layer_neighbors,
        levels=levels,
        entry=entry,
        M=M,
    )


def hnsw_search(
    index: HnswIndex,
    q,
    k: int,
    ef_search: int = 128,
    counter: DistanceCounter | None = None,
) -> SearchResult:
    """Greedy descent through the upper layers, then a beam of width
    max(ef_search, k) on layer 0."""
    qv = as_query(q, index.dim)
    if not 1 <= k <= index.n:
        raise ValueError(f"k must be in [1, {index.n}], got {k}")
    if ef_search < 1:
        raise ValueError("ef_search must be >= 1")
    cur = [index.entry]
    for layer in range(index.top_level, 0, -1):
        _, found = beam_search(
            index.vectors, lambda v: index.neighbors_of(layer, v), qv, cur, 1,
            counter=counter,
        )
        cur = found.tolist()
    d2s, ids = beam_search(
        index.vectors, lambda v: index.neighbors_of(0, v), qv, cur,
        max(ef_search, k), counter=counter,
    )
    return top_k(ids, d2s, k)
