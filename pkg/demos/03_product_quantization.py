"""Inside the product-quantized index: residuals, codebooks, the distance
table, and asymmetric distance computation.

Vectors are centered on their coarse centroid, the residual is cut into M
chunks, and each chunk is replaced by the id of its nearest sub-centroid.
A query builds an (M, ksub) table of chunk distances once per probed cell;
after that, each candidate's distance is just M table lookups summed.
"""

import numpy as np

from vann.ann import (
    exact_knn,
    kmeans_fit,
    pq_adc_distance,
    pq_distance_table,
    pq_encode,
    pq_train,
    recall,
    residuals_of,
)
from vann.ann import ivfpq_build, ivfpq_search
from vann.io import synthetic_gaussian

rng = np.random.default_rng(3)
data = synthetic_gaussian(2000, 32, 8, seed=3)

# --- coarse quantizer + residuals ---------------------------------------------
coarse = kmeans_fit(data, ncent=16, seed=3)
res = residuals_of(data, coarse)
print("residual norms are much smaller than vector norms:")
print(f"  mean |x|     = {np.linalg.norm(data, axis=1).mean():6.2f}")
print(f"  mean |x - c| = {np.linalg.norm(res, axis=1).mean():6.2f}")

# --- per-chunk codebooks --------------------------------------------------------
M, KSUB = 8, 64  # 8 chunks of 4 components, 64 centroids each
book = pq_train(data, coarse, M=M, ksub=KSUB, seed=3)
print(f"\ncodebook: M={book.M} chunks of dsub={book.dsub}, ksub={book.ksub} centroids each")

code = pq_encode(book, res[0])
print("vector 0 compresses to", code.tolist(), f"({M} bytes-ish vs {32 * 4} bytes raw)")

# --- the distance table ---------------------------------------------------------
q = synthetic_gaussian(1, 32, 8, seed=4)[0]
cell = int(np.argmin(np.linalg.norm(coarse.centroids - q, axis=1)))
q_res = q - coarse.centroids[cell]
table = pq_distance_table(book, q_res)
print(f"\ndistance table for the query's residual: shape {table.shape}")

adc = pq_adc_distance(table, code)
exact = float(np.sum((q_res.astype(np.float64) - res[0].astype(np.float64)) ** 2))
print(f"ADC distance to vector 0: {adc:8.3f}")
print(f"exact residual distance:  {exact:8.3f}  (ADC is the quantized estimate)")

# --- end to end ------------------------------------------------------------------
index = ivfpq_build(data, nlist=16, M=M, ksub=KSUB, seed=3)
queries = synthetic_gaussian(50, 32, 8, seed=5)
r = np.mean(
    [
        recall(ivfpq_search(index, q, 10, nprobe=4).ids, exact_knn(data, q, 10).ids)
        for q in queries
    ]
)
print(f"\nivfpq recall@10 at nprobe=4: {r:.3f} on {len(queries)} queries")
