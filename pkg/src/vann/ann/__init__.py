"""ANN index implementations and the shared exact-search oracle."""

from .annoy import AnnoyIndex, annoy_build, annoy_search, default_search_budget
from .base import (
    DistanceCounter,
    FlatIndex,
    SearchResult,
    as_dataset,
    as_query,
    exact_knn,
    flat_build,
    recall,
    top_k,
)
from .beam import beam_search
from .hnsw import HnswIndex, hnsw_assign_level, hnsw_build, hnsw_search
from .ivf import IvfFlatIndex, default_nlist, ivfflat_build, ivfflat_search
from .kmeans import KMeansModel, distortion, kmeans_fit
from .nsw import NswIndex, nsw_build, nsw_search
from .pq import (
    IvfPqIndex,
    PqCodebook,
    ivfpq_build,
    ivfpq_search,
    pq_adc_distance,
    pq_distance_table,
    pq_encode,
    pq_encode_many,
    pq_params,
    pq_train,
    residuals_of,
)
from .profile import algorithm_name, profile_query

__all__ = [
    "AnnoyIndex",
    "DistanceCounter",
    "FlatIndex",
    "HnswIndex",
    "IvfFlatIndex",
    "IvfPqIndex",
    "KMeansModel",
    "NswIndex",
    "PqCodebook",
    "SearchResult",
    "algorithm_name",
    "annoy_build",
    "annoy_search",
    "as_dataset",
    "as_query",
    "beam_search",
    "default_nlist",
    "default_search_budget",
    "distortion",
    "exact_knn",
    "flat_build",
    "hnsw_assign_level",
    "hnsw_build",
    "hnsw_search",
    "ivfflat_build",
    "ivfflat_search",
    "ivfpq_build",
    "ivfpq_search",
    "kmeans_fit",
    "nsw_build",
    "nsw_search",
    "pq_adc_distance",
    "pq_distance_table",
    "pq_encode",
    "pq_encode_many",
    "pq_params",
    "pq_train",
    "profile_query",
    "recall",
    "residuals_of",
    "top_k",
]
