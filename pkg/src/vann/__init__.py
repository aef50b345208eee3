"""vann: a laboratory for vectorized approximate-nearest-neighbor search.

Five ANN index implementations (IVFFlat, IVFPQ, NSW, HNSW, and a
random-projection forest) driven by strip-mined distance kernels, plus
a parameterized vector-unit cost model that sweeps hardware
configurations for the best-on-average design.
"""

from . import ann, io, kernels, persist, vusim
from .ann import (
    DistanceCounter,
    SearchResult,
    annoy_build,
    annoy_search,
    default_nlist,
    exact_knn,
    flat_build,
    hnsw_build,
    hnsw_search,
    ivfflat_build,
    ivfflat_search,
    ivfpq_build,
    ivfpq_search,
    kmeans_fit,
    nsw_build,
    nsw_search,
    profile_query,
    recall,
)
from .kernels import (
    scalar_dot,
    scalar_l2_squared,
    strip_mine,
    trace_dot,
    trace_l2,
    vec_dot,
    vec_l2_squared,
)
from .persist import load_index, save_index
from .vusim import (
    LatencyTable,
    SimReport,
    SweepSpec,
    VectorUnitConfig,
    WorkloadProfile,
    instruction_cost,
    qps,
    simulate_trace,
    sweep,
    table3_text,
)

__version__ = "0.1.0"
