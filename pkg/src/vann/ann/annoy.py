"""Random-projection tree forest.

Each tree splits its point set with the perpendicular bisector of two
randomly sampled points, recursing until leaf_cap points remain.  The
search walks all trees with one priority queue keyed by the signed
margin to the query, collects leaf candidates until the requested
budget of distinct ids is reached, then re-ranks them exactly.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from ..kernels import dot_to_many, l2_squared_to_many
from .base import DistanceCounter, SearchResult, as_dataset, as_query, top_k

_SPLIT_ATTEMPTS = 3

KIND_INTERNAL = 0
KIND_LEAF = 1


@dataclass
class AnnoyIndex:
    vectors: np.ndarray  # (n, d) float32
    n_trees: int
    leaf_cap: int
    roots: np.ndarray  # (n_trees,) int32 node ids
    kind: np.ndarray  # (nodes,) uint8
    left: np.ndarray  # (nodes,) int32, -1 for leaves
    right: np.ndarray  # (nodes,) int32
    plane: np.ndarray  # (nodes,) int32 row into normals/plane_offsets, -1 for leaves
    normals: np.ndarray  # (internal, d) float32 split normals
    plane_offsets: np.ndarray  # (internal,) float64
    leaf_slot: np.ndarray  # (nodes,) int32 row into leaf CSR, -1 for internals
    leaf_offsets: np.ndarray  # (leaves + 1,) int64
    leaf_ids: np.ndarray  # int64 concatenated leaf memberships

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def leaf_members(self, node: int) -> np.ndarray:
        slot = self.leaf_slot[node]
        return self.leaf_ids[self.leaf_offsets[slot] : self.leaf_offsets[slot + 1]]

    def tree_leaves(self, tree: int) -> list[np.ndarray]:
        """Leaf membership arrays of one tree, left-to-right."""
        out, stack = [], [int(self.roots[tree])]
        while stack:
            node = stack.pop()
            if self.kind[node] == KIND_LEAF:
                out.append(self.leaf_members(node))
            else:
                stack.append(int(self.right[node]))
                stack.append(int(self.left[node]))
        return out

    def search(self, q, k: int, search_budget: int | None = None,
               counter: DistanceCounter | None = None) -> SearchResult:
        return annoy_search(self, q, k, search_budget, counter=counter)


class _Builder:
    def __init__(self, dim: int):
        self.kind: list[int] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.plane: list[int] = []
        self.leaf_slot: list[int] = []
        self.normals: list[np.ndarray] = []
        self.plane_offsets: list[float] = []
        self.leaves: list[np.ndarray] = []
        self.dim = dim

    def new_node(self) -> int:
        self.kind.append(KIND_LEAF)
        self.left.append(-1)
        self.right.append(-1)
        self.plane.append(-1)
        self.leaf_slot.append(-1)
        return len(self.kind) - 1

    def set_leaf(self, node: int, ids: np.ndarray) -> None:
        self.leaf_slot[node] = len(self.leaves)
        self.leaves.append(np.sort(ids).astype(np.int64))

    def set_internal(self, node: int, normal, offset: float, left: int, right: int) -> None:
        self.kind[node] = KIND_INTERNAL
        self.left[node] = left
        self.right[node] = right
        self.plane[node] = len(self.normals)
        self.normals.append(np.asarray(normal, dtype=np.float32))
        self.plane_offsets.append(float(offset))


def _choose_split(
    vectors: np.ndarray, ids: np.ndarray, rng: np.random.Generator
) -> tuple[np.ndarray, float, np.ndarray] | None:
    """Perpendicular bisector of two sampled points; None if every attempt
    collapsed (duplicate sample or one-sided split)."""
    for _ in range(_SPLIT_ATTEMPTS):
        i, j = rng.choice(ids.size, size=2, replace=False)
        p1 = vectors[ids[i]].astype(np.float64)
        p2 = vectors[ids[j]].astype(np.float64)
        if np.array_equal(p1, p2):
            continue
        normal = (p2 - p1).astype(np.float32)
        offset = float(normal.astype(np.float64) @ ((p1 + p2) / 2.0))
        margins = dot_to_many(vectors[ids], normal) - offset
        go_left = margins < 0.0
        if go_left.all() or not go_left.any():
            continue
        return normal, offset, go_left
    return None


def annoy_build(data, n_trees: int = 64, leaf_cap: int = 16, seed: int = 0) -> AnnoyIndex:
    """Grow n_trees independent random-projection trees over the dataset."""
    data = as_dataset(data)
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if leaf_cap < 1:
        raise ValueError("leaf_cap must be >= 1")
    n, dim = data.shape
    rng = np.random.default_rng(seed)
    b = _Builder(dim)
    roots = []
    for _ in range(n_trees):
        root = b.new_node()
        roots.append(root)
        stack = [(root, np.arange(n, dtype=np.int64))]
        while stack:
            node, ids = stack.pop()
            if ids.size <= leaf_cap:
                b.set_leaf(node, ids)
                continue
            split = _choose_split(data, ids, rng)
            if split is None:
                # Degenerate set (e.g. duplicates): neutral zero plane and a
                # random balanced split so recursion still terminates.
                normal = np.zeros(dim, dtype=np.float32)
                offset = 0.0
                perm = rng.permutation(ids.size)
                go_left = np.zeros(ids.size, dtype=bool)
                go_left[perm[: ids.size // 2]] = True
            else:
                normal, offset, go_left = split
            left, right = b.new_node(), b.new_node()
            b.set_internal(node, normal, offset, left, right)
            stack.append((right, ids[~go_left]))
            stack.append((left, ids[go_left]))

    leaf_offsets = np.zeros(len(b.leaves) + 1, dtype=np.int64)
    np.cumsum([ids.size for ids in b.leaves], out=leaf_offsets[1:])
    return AnnoyIndex(
        vectors=data,
        n_trees=n_trees,
        leaf_cap=leaf_cap,
        roots=np.asarray(roots, dtype=np.int32),
        kind=np.asarray(b.kind, dtype=np.uint8),
        left=np.asarray(b.left, dtype=np.int32),
        right=np.asarray(b.right, dtype=np.int32),
        plane=np.asarray(b.plane, dtype=np.int32),
        normals=(
            np.vstack(b.normals).astype(np.float32)
            if b.normals
            else np.empty((0, dim), dtype=np.float32)
        ),
        plane_offsets=np.asarray(b.plane_offsets, dtype=np.float64),
        leaf_slot=np.asarray(b.leaf_slot, dtype=np.int32),
        leaf_offsets=leaf_offsets,
        leaf_ids=(
            np.concatenate(b.leaves) if b.leaves else np.empty(0, dtype=np.int64)
        ),
    )


def default_search_budget(k: int, n_trees: int) -> int:
    """Candidate budget: twice k per tree."""
    return 2 * k * n_trees


def annoy_search(
    index: AnnoyIndex,
    q,
    k: int,
    search_budget: int | None = None,
    counter: DistanceCounter | None = None,
) -> SearchResult:
    """Best-first forest traversal collecting at least search_budget distinct
    candidates (or every reachable one), then exact re-ranking."""
    qv = as_query(q, index.dim)
    if not 1 <= k <= index.n:
        raise ValueError(f"k must be in [1, {index.n}], got {k}")
    budget = default_search_budget(k, index.n_trees) if search_budget is None else search_budget
    if budget < 1:
        raise ValueError("search_budget must be >= 1")

    # All plane margins in one matvec; the counter still tallies one dot per
    # visited internal node, which is what the traversal logically performs.
    margins = dot_to_many(index.normals, qv) - index.plane_offsets
    kind = index.kind.tolist()
    left = index.left.tolist()
    right = index.right.tolist()
    plane = index.plane.tolist()

    seen = np.zeros(index.n, dtype=bool)
    collected = 0
    heap: list[tuple[float, int, int]] = []  # (-key, push seq, node)
    seq = 0
    for root in index.roots.tolist():
        heap.append((-np.inf, seq, root))
        seq += 1
    heapq.heapify(heap)

    while heap and collected < budget:
        neg_key, _, node = heapq.heappop(heap)
        key = -neg_key
        if kind[node] == KIND_LEAF:
            ids = index.leaf_members(node)
            fresh = ids[~seen[ids]]
            seen[fresh] = True
            collected += fresh.size
            continue
        margin = float(margins[plane[node]])
        if counter is not None:
            counter.add(1)
        heapq.heappush(heap, (-min(key, margin), seq, right[node]))
        seq += 1
        heapq.heappush(heap, (-min(key, -margin), seq, left[node]))
        seq += 1

    cand = np.flatnonzero(seen)
    d2 = l2_squared_to_many(index.vectors[cand], qv)
    if counter is not None:
        counter.add(cand.size)
    return top_k(cand, d2, k)
