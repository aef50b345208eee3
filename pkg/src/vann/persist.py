"""Index persistence.

File layout: magic "VANN", little-endian u16 format version, u8
algorithm tag, u32-length-prefixed JSON parameter block (scalar
parameters plus an array manifest), then each manifest array's raw
little-endian bytes in order.  A reloaded index answers queries
bit-identically to the one that was saved.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .ann.annoy import AnnoyIndex
from .ann.base import FlatIndex
from .ann.hnsw import HnswIndex
from .ann.ivf import IvfFlatIndex
from .ann.kmeans import KMeansModel
from .ann.nsw import NswIndex
from .ann.pq import IvfPqIndex, PqCodebook
from .errors import (
    BadMagicError,
    FormatVersionError,
    IndexFormatError,
    TruncatedFileError,
)

MAGIC = b"VANN"
VERSION = 1


def _flat_state(ix: FlatIndex):
    return {}, {"vectors": ix.vectors}


def _flat_restore(params, arrays):
    return FlatIndex(vectors=arrays["vectors"])


def _ivfflat_state(ix: IvfFlatIndex):
    return {}, {
        "vectors": ix.vectors,
        "centroids": ix.kmeans.centroids,
        "assignment": ix.kmeans.assignment,
        "list_offsets": ix.list_offsets,
        "list_ids": ix.list_ids,
    }


def _ivfflat_restore(params, arrays):
    return IvfFlatIndex(
        kmeans=KMeansModel(centroids=arrays["centroids"], assignment=arrays["assignment"]),
        vectors=arrays["vectors"],
        list_offsets=arrays["list_offsets"],
        list_ids=arrays["list_ids"],
    )


def _ivfpq_state(ix: IvfPqIndex):
    return {}, {
        "centroids": ix.kmeans.centroids,
        "assignment": ix.kmeans.assignment,
        "codebook": ix.codebook.centroids,
        "list_offsets": ix.list_offsets,
        "list_ids": ix.list_ids,
        "codes": ix.codes,
    }


def _ivfpq_restore(params, arrays):
    return IvfPqIndex(
        kmeans=KMeansModel(centroids=arrays["centroids"], assignment=arrays["assignment"]),
        codebook=PqCodebook(centroids=arrays["codebook"]),
        list_offsets=arrays["list_offsets"],
        list_ids=arrays["list_ids"],
        codes=arrays["codes"],
    )


def _nsw_state(ix: NswIndex):
    params = {
        "nn": ix.nn,
        "ef_construction": ix.ef_construction,
        "ef_search": ix.ef_search,
        "entry": ix.entry,
    }
    return params, {
        "vectors": ix.vectors,
        "offsets": ix.offsets,
        "neighbors": ix.neighbors,
    }


def _nsw_restore(params, arrays):
    return NswIndex(
        vectors=arrays["vectors"],
        offsets=arrays["offsets"],
        neighbors=arrays["neighbors"],
        nn=int(params["nn"]),
        ef_construction=int(params["ef_construction"]),
        ef_search=int(params["ef_search"]),
        entry=int(params["entry"]),
    )


def _hnsw_state(ix: HnswIndex):
    params = {"M": ix.M, "entry": ix.entry, "n_layers": len(ix.layer_offsets)}
    arrays = {"vectors": ix.vectors, "levels": ix.levels}
    for layer, (offs, neigh) in enumerate(zip(ix.layer_offsets, ix.layer_neighbors)):
        arrays[f"layer{layer}_offsets"] = offs
        arrays[f"layer{layer}_neighbors"] = neigh
    return params, arrays


def _hnsw_restore(params, arrays):
    n_layers = int(params["n_layers"])
    return HnswIndex(
        vectors=arrays["vectors"],
        layer_offsets=[arrays[f"layer{i}_offsets"] for i in range(n_layers)],
        layer_neighbors=[arrays[f"layer{i}_neighbors"] for i in range(n_layers)],
        levels=arrays["levels"],
        entry=int(params["entry"]),
        M=int(params["M"]),
    )


def _annoy_state(ix: AnnoyIndex):
    params = {"n_trees": ix.n_trees, "leaf_cap": ix.leaf_cap}
    return params, {
        "vectors": ix.vectors,
        "roots": ix.roots,
        "kind": ix.kind,
        "left": ix.left,
        "right": ix.right,
        "plane": ix.plane,
        "normals": ix.normals,
        "plane_offsets": ix.plane_offsets,
        "leaf_slot": ix.leaf_slot,
        "leaf_offsets": ix.leaf_offsets,
        "leaf_ids": ix.leaf_ids,
    }


def _annoy_restore(params, arrays):
    return AnnoyIndex(
        vectors=arrays["vectors"],
        n_trees=int(params["n_trees"]),
        leaf_cap=int(params["leaf_cap"]),
        roots=arrays["roots"],
        kind=arrays["kind"],
        left=arrays["left"],
        right=arrays["right"],
        plane=arrays["plane"],
        normals=arrays["normals"],
        plane_offsets=arrays["plane_offsets"],
        leaf_slot=arrays["leaf_slot"],
        leaf_offsets=arrays["leaf_offsets"],
        leaf_ids=arrays["leaf_ids"],
    )


_REGISTRY = {
    1: (FlatIndex, _flat_state, _flat_restore),
    2: (IvfFlatIndex, _ivfflat_state, _ivfflat_restore),
    3: (IvfPqIndex, _ivfpq_state, _ivfpq_restore),
    4: (NswIndex, _nsw_state, _nsw_restore),
    5: (HnswIndex, _hnsw_state, _hnsw_restore),
    6: (AnnoyIndex, _annoy_state, _annoy_restore),
}
_TAG_OF = {cls: tag for tag, (cls, _, _) in _REGISTRY.items()}


def _le(arr: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(arr)
    if out.dtype.byteorder == ">":
        out = out.astype(out.dtype.newbyteorder("<"))
    return out


def save_index(index, path) -> None:
    """Serialize any of the supported index types to the pinned layout."""
    tag = _TAG_OF.get(type(index))
    if tag is None:
        raise TypeError(f"cannot persist {type(index).__name__}")
    params, arrays = _REGISTRY[tag][1](index)
    arrays = {name: _le(a) for name, a in arrays.items()}
    manifest = [
        {"name": name, "dtype": a.dtype.str, "shape": list(a.shape)}
        for name, a in arrays.items()
    ]
    header = json.dumps({"params": params, "arrays": manifest}, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", VERSION))
        fh.write(struct.pack("<B", tag))
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        for a in arrays.values():
            fh.write(a.tobytes())


def _read_exact(fh, count: int, what: str) -> bytes:
    data = fh.read(count)
    if len(data) != count:
        raise TruncatedFileError(f"file ends inside {what}")
    return data


def load_index(path):
    """Load an index file, rejecting bad magic, unknown versions and
    truncated payloads with distinct error types."""
    with open(path, "rb") as fh:
        if _read_exact(fh, 4, "magic") != MAGIC:
            raise BadMagicError(f"{path}: not an index file")
        (version,) = struct.unpack("<H", _read_exact(fh, 2, "version"))
        if version != VERSION:
            raise FormatVersionError(f"{path}: unsupported version {version}")
        (tag,) = struct.unpack("<B", _read_exact(fh, 1, "algorithm tag"))
        if tag not in _REGISTRY:
            raise IndexFormatError(f"{path}: unknown algorithm tag {tag}")
        (header_len,) = struct.unpack("<I", _read_exact(fh, 4, "header length"))
        try:
            header = json.loads(_read_exact(fh, header_len, "header"))
            manifest = header["arrays"]
            params = header["params"]
        except (ValueError, KeyError, TypeError) as exc:
            raise IndexFormatError(f"{path}: bad parameter block: {exc}") from None
        arrays = {}
        for entry in manifest:
            dtype = np.dtype(entry["dtype"])
            shape = tuple(int(s) for s in entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = _read_exact(fh, count * dtype.itemsize, f"array {entry['name']}")
            arrays[entry["name"]] = np.frombuffer(raw, dtype=dtype).reshape(shape).copy()
        if fh.read(1):
            raise IndexFormatError(f"{path}: trailing data after payload")
    return _REGISTRY[tag][2](params, arrays)
