"""Dataset loaders, synthetic data generation, and report files.

Text formats are parsed strictly: a malformed line fails with a
ParseError naming the file and 1-based line number, never with silent
truncation.  Cropping always takes a prefix of the rows.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import ParseError


def load_libsvm(path, dim: int, crop: int | None = None):
    """Parse sparse "label idx:val ..." lines into a dense (n, dim) matrix.

    Feature indices are 1-based; absent features densify to zero.
    Returns (vectors, labels); labels are parsed but unused downstream.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rows: list[np.ndarray] = []
    labels: list[float] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if crop is not None and len(rows) >= crop:
                break
            parts = line.split()
            if not parts:
                raise ParseError(path, line_no, "empty line")
            try:
                label = float(parts[0])
            except ValueError:
                raise ParseError(path, line_no, f"bad label {parts[0]!r}") from None
            row = np.zeros(dim, dtype=np.float32)
            for item in parts[1:]:
                idx_s, _, val_s = item.partition(":")
                if not val_s:
                    raise ParseError(path, line_no, f"expected idx:val, got {item!r}")
                try:
                    idx = int(idx_s)
                    val = float(val_s)
                except ValueError:
                    raise ParseError(path, line_no, f"expected idx:val, got {item!r}") from None
                if idx < 1:
                    raise ParseError(path, line_no, f"feature index {idx} is not 1-based")
                if idx > dim:
                    raise ParseError(
                        path, line_no, f"feature index {idx} exceeds dimension {dim}"
                    )
                row[idx - 1] = val
            rows.append(row)
            labels.append(label)
    if not rows:
        raise ParseError(path, 1, "file contains no rows")
    return np.vstack(rows), np.asarray(labels, dtype=np.float32)


def load_glove(path, crop: int | None = None):
    """Parse "token f1 ... fd" lines; d is fixed by the first line.

    Returns (vectors, tokens).
    """
    rows: list[np.ndarray] = []
    tokens: list[str] = []
    dim: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if crop is not None and len(rows) >= crop:
                break
            parts = line.split()
            if len(parts) < 2:
                raise ParseError(path, line_no, "expected a token and at least one value")
            token, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
            elif len(values) != dim:
                raise ParseError(
                    path, line_no, f"row has {len(values)} values, expected {dim}"
                )
            try:
                row = np.asarray([float(v) for v in values], dtype=np.float32)
            except ValueError:
                raise ParseError(path, line_no, "non-numeric value") from None
            rows.append(row)
            tokens.append(token)
    if not rows:
        raise ParseError(path, 1, "file contains no rows")
    return np.vstack(rows), tokens


def gaussian_cluster_means(clusters: int, d: int, scale: float = 10.0) -> np.ndarray:
    """Deterministic well-separated cluster means: cluster i sits at
    distance ~scale along axis (i mod d), growing in magnitude each time
    the axes wrap around."""
    if clusters < 1 or d < 1:
        raise ValueError("clusters and d must be >= 1")
    means = np.zeros((clusters, d), dtype=np.float64)
    for i in range(clusters):
        axis = i % d
        ring = i // d
        sign = 1.0 if ring % 2 == 0 else -1.0
        means[i, axis] = sign * scale * (1.0 + ring)
    return means


def synthetic_gaussian(n: int, d: int, clusters: int, seed: int) -> np.ndarray:
    """Seeded mixture of unit-variance Gaussians around well-separated means."""
    if n < 1:
        raise ValueError("n must be >= 1")
    means = gaussian_cluster_means(clusters, d)
    rng = np.random.default_rng(seed)
    which = rng.integers(0, clusters, size=n)
    points = means[which] + rng.standard_normal((n, d))
    return points.astype(np.float32)


def format_value(v) -> str:
    """Fixed rendering used by every report writer."""
    if isinstance(v, bool):
        return str(v)
    if isinstance(v, float) or isinstance(v, np.floating):
        return f"{float(v):.6g}"
    return str(v)


def write_report(rows, columns, path, fmt: str = "csv") -> None:
    """Write result rows (dicts) with a stable column order.

    fmt "csv" emits a header plus one line per row; "structured" emits a
    JSON document.  Identical inputs produce byte-identical files.
    """
    if fmt == "csv":
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns)
            for row in rows:
                writer.writerow([format_value(row.get(c, "")) for c in columns])
    elif fmt == "structured":
        payload = {
            "columns": list(columns),
            "rows": [{c: row.get(c) for c in columns} for row in rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=float)
            fh.write("\n")
    else:
        raise ValueError(f"unknown report format {fmt!r}")
