"""Product quantization over coarse residuals, and the IVF+PQ index.

Vectors are centered on their coarse centroid, the residual is cut into
M chunks of dsub components, and each chunk is quantized by its own
ksub-centroid codebook.  Queries build an (M, ksub) table of chunk
distances once per probed cell; candidate distances are then sums of M
table entries (asymmetric distance computation).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import DistanceCounter, SearchResult, as_dataset, as_query, top_k
from .ivf import build_cell_lists, probe_cells
from .kmeans import KMeansModel, kmeans_fit


def pq_params(dim: int, chunk_size: int, encode_bits: int) -> tuple[int, int]:
    """Chunk count and per-chunk centroid count from (chunk size, code bits)."""
    if chunk_size < 1 or dim % chunk_size != 0:
        raise ValueError(f"dim {dim} is not divisible by chunk size {chunk_size}")
    if encode_bits < 1:
        raise ValueError("encode_bits must be >= 1")
    return dim // chunk_size, 2**encode_bits


@dataclass
class PqCodebook:
    centroids: np.ndarray  # (M, ksub, dsub) float32

    @property
    def M(self) -> int:
        return self.centroids.shape[0]

    @property
    def ksub(self) -> int:
        return self.centroids.shape[1]

    @property
    def dsub(self) -> int:
        return self.centroids.shape[2]

    @property
    def dim(self) -> int:
        return self.M * self.dsub


def residuals_of(data: np.ndarray, coarse: KMeansModel) -> np.ndarray:
    """Component-wise difference between each vector and its cell centroid."""
    return data - coarse.centroids[coarse.assignment]


def pq_train(
    data,
    coarse: KMeansModel,
    M: int,
    ksub: int,
    iters: int = 25,
    seed: int = 0,
) -> PqCodebook:
    """Train one k-means codebook per residual chunk; deterministic per seed."""
    data = as_dataset(data)
    n, dim = data.shape
    if M < 1 or dim % M != 0:
        raise ValueError(f"dim {dim} is not divisible by M {M}")
    if not 1 <= ksub <= n:
        raise ValueError(f"ksub must be in [1, {n}], got {ksub}")
    dsub = dim // M
    res = residuals_of(data, coarse)
    chunk_seeds = np.random.SeedSequence(seed).generate_state(M)
    centroids = np.empty((M, ksub, dsub), dtype=np.float32)
    for m in range(M):
        chunk = res[:, m * dsub : (m + 1) * dsub]
        centroids[m] = kmeans_fit(chunk, ksub, iters=iters, seed=int(chunk_seeds[m])).centroids
    return PqCodebook(centroids=centroids)


def pq_encode(codebook: PqCodebook, residual) -> np.ndarray:
    """Per-chunk nearest sub-centroid ids, ties to the smaller id."""
    rv = as_query(residual, codebook.dim)
    return pq_encode_many(codebook, rv[None, :])[0]


def pq_encode_many(codebook: PqCodebook, residuals: np.ndarray) -> np.ndarray:
    """Encode a (n, dim) residual matrix into (n, M) uint16 codes."""
    n = residuals.shape[0]
    M, ksub, dsub = codebook.M, codebook.ksub, codebook.dsub
    codes = np.empty((n, M), dtype=np.uint16)
    for m in range(M):
        chunk = residuals[:, m * dsub : (m + 1) * dsub].astype(np.float64)
        cents = codebook.centroids[m].astype(np.float64)
        d2 = (
            np.sum(chunk * chunk, axis=1)[:, None]
            - 2.0 * chunk @ cents.T
            + np.sum(cents * cents, axis=1)[None, :]
        )
        codes[:, m] = np.argmin(d2, axis=1)
    return codes


def pq_distance_table(codebook: PqCodebook, q_residual) -> np.ndarray:
    """(M, ksub) float32 table of squared chunk distances for one query.

    Entries use the same left-to-right float32 accumulation as the scalar
    distance kernel, so each one matches scalar_l2_squared on its chunk.
    """
    rv = as_query(q_residual, codebook.dim)
    chunks = rv.reshape(codebook.M, 1, codebook.dsub)
    diff = codebook.centroids - chunks
    return np.cumsum(diff * diff, axis=2, dtype=np.float32)[:, :, -1]


def pq_adc_distance(table: np.ndarray, code) -> float:
    """Sum of the code's table entries, accumulated left to right in float64."""
    code = np.asarray(code)
    vals = table[np.arange(table.shape[0]), code]
    return float(np.cumsum(vals, dtype=np.float64)[-1])


def _adc_many(table: np.ndarray, codes: np.ndarray) -> np.ndarray:
    # Same accumulation order as pq_adc_distance, batched over candidates.
    vals = table[np.arange(table.shape[0])[None, :], codes]
    return np.cumsum(vals, axis=1, dtype=np.float64)[:, -1]


@dataclass
class IvfPqIndex:
    kmeans: KMeansModel  # coarse partition
    codebook: PqCodebook
    list_offsets: np.ndarray  # (nlist + 1,) int64
    list_ids: np.ndarray  # (n,) int64
    codes: np.ndarray  # (n, M) uint16, rows aligned with list_ids

    @property
    def nlist(self) -> int:
        return self.kmeans.ncent

    @property
    def n(self) -> int:
        return self.list_ids.shape[0]

    @property
    def dim(self) -> int:
        return self.codebook.dim

    def search(self, q, k: int, nprobe: int = 8, counter: DistanceCounter | None = None):
        return ivfpq_search(self, q, k, nprobe, counter=counter)


def ivfpq_build(
    data,
    nlist: int,
    M: int,
    ksub: int,
    seed: int = 0,
    iters: int = 25,
) -> IvfPqIndex:
    """Coarse k-means partition plus per-chunk residual codebooks."""
    data = as_dataset(data)
    coarse_seed, pq_seed = np.random.SeedSequence(seed).generate_state(2)
    coarse = kmeans_fit(data, nlist, iters=iters, seed=int(coarse_seed))
    codebook = pq_train(data, coarse, M, ksub, iters=iters, seed=int(pq_seed))
    offsets, ids = build_cell_lists(coarse.assignment, nlist)
    codes = pq_encode_many(codebook, residuals_of(data, coarse))[ids]
    return IvfPqIndex(
        kmeans=coarse,
        codebook=codebook,
        list_offsets=offsets,
        list_ids=ids,
        codes=codes,
    )


def ivfpq_search(
    index: IvfPqIndex,
    q,
    k: int,
    nprobe: int,
    counter: DistanceCounter | None = None,
) -> SearchResult:
    """ADC scan of the nprobe nearest cells.

    One residual query and one distance table are computed per probed
    cell; reported distances are the (approximate) table sums.
    """
    qv = as_query(q, index.dim)
    if not 1 <= k <= index.n:
        raise ValueError(f"k must be in [1, {index.n}], got {k}")
    if not 1 <= nprobe <= index.nlist:
        raise ValueError(f"nprobe must be in [1, {index.nlist}], got {nprobe}")
    cells = probe_cells(index.kmeans.centroids, qv, nprobe)
    if counter is not None:
        counter.add(index.nlist)
    cand_ids = []
    cand_d2 = []
    for c in cells:
        lo, hi = index.list_offsets[c], index.list_offsets[c + 1]
        if lo == hi:
            continue
        q_res = qv - index.kmeans.centroids[c]
        table = pq_distance_table(index.codebook, q_res)
        if counter is not None:
            counter.add_chunks(index.codebook.M * index.codebook.ksub)
        cand_ids.append(index.list_ids[lo:hi])
        cand_d2.append(_adc_many(table, index.codes[lo:hi]))
    if not cand_ids:
        return SearchResult(
            ids=np.empty(0, dtype=np.int64), distances=np.empty(0, dtype=np.float64)
        )
    return top_k(np.concatenate(cand_ids), np.concatenate(cand_d2), k)
