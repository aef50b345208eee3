"""Price kernel traces on parameterized vector units and sweep the design
space for the best-on-average configuration.

A configuration is (vlen, k, n, m): register width in bits, register
count, adders, fused-MAC units, under a fixed 1.85 GHz clock and
29.8 GB/s of memory bandwidth.  Workload profiles measured from the ANN
indexes supply calls-per-query; the sweep reports one winner per
algorithm plus the configuration maximizing mean queries per second.
"""

import numpy as np

from vann.ann import (
    annoy_build,
    default_nlist,
    hnsw_build,
    ivfflat_build,
    ivfpq_build,
    nsw_build,
    profile_query,
)
from vann.io import synthetic_gaussian
from vann.kernels import trace_l2
from vann.vusim import (
    SweepSpec,
    VectorUnitConfig,
    WorkloadProfile,
    qps,
    simulate_trace,
    sweep,
    table3_text,
)

# --- pricing one kernel call -----------------------------------------------
config = VectorUnitConfig(vlen=512, k=4, n=16, m=16)
cost = simulate_trace(trace_l2(2000, 16), config)
print(f"L2 over 2000 features on vlen=512, n=m=16: {cost.cycles} cycles")
for vlen in (128, 512, 2048, 8192):
    cfg = VectorUnitConfig(vlen=vlen, k=4, n=16, m=16)
    c = simulate_trace(trace_l2(2000, cfg.lanes), cfg)
    print(f"  vlen={vlen:5d} ({cfg.lanes:3d} lanes): {c.cycles:5d} cycles/call")

report = qps(WorkloadProfile("demo", dim=2000, calls_per_query=430.0), config)
print(f"430 calls/query -> {report.qps:,.0f} queries/s, "
      f"{report.achieved_bandwidth / 1e9:.1f} GB/s of the 29.8 GB/s budget")

# --- measured workload profiles ----------------------------------------------
N, DIM = 4000, 32
data = synthetic_gaussian(N, DIM, 16, seed=7)
queries = synthetic_gaussian(25, DIM, 16, seed=8)
nlist = default_nlist(N)
print(f"\nmeasuring profiles on a {N}x{DIM} dataset (takes a minute)...")
indexes = [
    (ivfflat_build(data, nlist=nlist, seed=7), {"nprobe": 8}),
    (ivfpq_build(data, nlist=nlist, M=16, ksub=256, seed=7), {"nprobe": 8}),
    (hnsw_build(data, M=16, ef_construction=256, seed=7), {"ef_search": 128}),
    (annoy_build(data, n_trees=64, leaf_cap=16, seed=7), {}),
    (nsw_build(data, nn=16, ef_construction=256, seed=7), {"ef_search": 128}),
]
profiles = [profile_query(ix, queries, 10, params) for ix, params in indexes]
for p in profiles:
    print(f"  {p.algorithm:8s} {p.calls_per_query:10.1f} {p.kernel} calls/query at dim {p.dim}")

# --- the sweep -----------------------------------------------------------------
# Default grid: vlen 128..16384, n and m 1..512 (powers of two), k in 4..32.
result = sweep(SweepSpec(), profiles)
print("\nbest configurations (bandwidth for the average column is the mean")
print("over all algorithms on that configuration):\n")
print(table3_text(result))
