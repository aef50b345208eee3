"""Command-line interface: build, search, bench, profile, sweep, exact.

Exit codes: 0 success, 2 parameter errors, 3 I/O or file-format errors,
4 infeasible simulator configurations.
"""

from __future__ import annotations

import argparse
import os
import statistics
import sys
import time

import numpy as np

from . import io as vio
from .ann import (
    AnnoyIndex,
    HnswIndex,
    IvfFlatIndex,
    IvfPqIndex,
    NswIndex,
    algorithm_name,
    annoy_build,
    default_nlist,
    exact_knn,
    flat_build,
    hnsw_build,
    ivfflat_build,
    ivfpq_build,
    nsw_build,
    profile_query,
    recall,
)
from .errors import IndexFormatError, InfeasibleConfigError, ParseError
from .persist import load_index, save_index
from .vusim import (
    DEFAULT_LATENCIES,
    SweepResult,
    SweepSpec,
    load_profiles,
    load_sweep_spec,
    save_profiles,
    sweep,
    table3_cells,
    table3_text,
)

ALGORITHMS = ("flat", "ivfflat", "ivfpq", "nsw", "hnsw", "annoy")


def _default_seed() -> int:
    return int(os.environ.get("VANN_SEED", "0"))


def parse_dataset_spec(spec: str) -> dict:
    """Parse "source:arg,key=value,..." dataset descriptors.

    synthetic:n=2000,d=32,clusters=16[,crop=N]
    libsvm:PATH,dim=2000[,crop=N]
    glove:PATH[,crop=N]
    """
    source, _, rest = spec.partition(":")
    if source not in ("synthetic", "libsvm", "glove"):
        raise ValueError(f"unknown dataset source {source!r}")
    out: dict = {"source": source}
    items = [s for s in rest.split(",") if s]
    if source in ("libsvm", "glove"):
        if not items:
            raise ValueError(f"{source} spec needs a path")
        out["path"] = items[0]
        items = items[1:]
    for item in items:
        key, eq, value = item.partition("=")
        if not eq:
            raise ValueError(f"expected key=value in dataset spec, got {item!r}")
        out[key] = int(value)
    return out


def load_dataset(spec: dict, seed: int) -> np.ndarray:
    crop = spec.get("crop")
    if spec["source"] == "synthetic":
        data = vio.synthetic_gaussian(
            n=spec.get("n", 2000),
            d=spec.get("d", 32),
            clusters=spec.get("clusters", 16),
            seed=spec.get("seed", seed),
        )
        return data[:crop] if crop is not None else data
    if spec["source"] == "libsvm":
        if "dim" not in spec:
            raise ValueError("libsvm spec needs dim=<features>")
        vectors, _ = vio.load_libsvm(spec["path"], dim=spec["dim"], crop=crop)
        return vectors
    vectors, _ = vio.load_glove(spec["path"], crop=crop)
    return vectors


def _resolve_nlist(value: str, n: int) -> int:
    if value == "auto":
        return default_nlist(n)
    nlist = int(value)
    if nlist < 1:
        raise ValueError("nlist must be >= 1 or 'auto'")
    return nlist


def _build_index(args, data: np.ndarray):
    if args.algo == "flat":
        return flat_build(data)
    if args.algo == "ivfflat":
        nlist = _resolve_nlist(args.nlist, data.shape[0])
        return ivfflat_build(data, nlist=nlist, seed=args.seed, iters=args.iters)
    if args.algo == "ivfpq":
        nlist = _resolve_nlist(args.nlist, data.shape[0])
        from .ann import pq_params

        M, ksub = pq_params(data.shape[1], args.pq_chunk, args.pq_bits)
        return ivfpq_build(
            data, nlist=nlist, M=M, ksub=min(ksub, data.shape[0]),
            seed=args.seed, iters=args.iters,
        )
    if args.algo == "nsw":
        return nsw_build(
            data, nn=args.nn, ef_construction=args.ef_construction,
            ef_search=args.ef_search, seed=args.seed,
        )
    if args.algo == "hnsw":
        return hnsw_build(
            data, M=args.M, ef_construction=args.ef_construction,
            seed=args.seed, level_scheme=args.hnsw_levels,
        )
    return annoy_build(data, n_trees=args.n_trees, leaf_cap=args.leaf_cap, seed=args.seed)


def _validate_build_args(args) -> None:
    checks = (
        ("M", args.M >= 1),
        ("nn", args.nn >= 1),
        ("ef-construction", args.ef_construction >= 1),
        ("ef-search", args.ef_search >= 1),
        ("n-trees", args.n_trees >= 1),
        ("leaf-cap", args.leaf_cap >= 1),
        ("pq-chunk", args.pq_chunk >= 1),
        ("pq-bits", args.pq_bits >= 1),
        ("iters", args.iters >= 1),
    )
    for name, ok in checks:
        if not ok:
            raise ValueError(f"--{name} must be >= 1")
    if args.nlist != "auto":
        int(args.nlist)


def search_params_for(index, args) -> dict:
    if isinstance(index, (IvfFlatIndex, IvfPqIndex)):
        return {"nprobe": args.nprobe}
    if isinstance(index, NswIndex):
        return {"ef_search": args.ef_search}
    if isinstance(index, HnswIndex):
        return {"ef_search": args.ef_search}
    if isinstance(index, AnnoyIndex):
        budget = args.search_budget
        return {} if budget is None else {"search_budget": budget}
    return {}


def cmd_build(args) -> int:
    _validate_build_args(args)
    data = load_dataset(parse_dataset_spec(args.data), args.seed)
    t0 = time.perf_counter()
    index = _build_index(args, data)
    build_s = time.perf_counter() - t0
    save_index(index, args.out)
    extra = ""
    if isinstance(index, (IvfFlatIndex, IvfPqIndex)):
        extra = f" nlist={index.nlist}"
    print(
        f"built {args.algo} over {data.shape[0]}x{data.shape[1]}{extra} "
        f"in {build_s:.3f}s -> {args.out}"
    )
    return 0


def cmd_search(args) -> int:
    index = load_index(args.index)
    queries = load_dataset(parse_dataset_spec(args.queries), args.seed)
    params = search_params_for(index, args)
    recalls = []
    for i, q in enumerate(queries):
        result = index.search(q, args.k, **params)
        ids = " ".join(str(v) for v in result.ids.tolist())
        print(f"{i}: {ids}")
        if args.truth == "exact":
            if not hasattr(index, "vectors"):
                raise ValueError(
                    f"{algorithm_name(index)} index stores no raw vectors; "
                    "recall needs an index type that does"
                )
            truth = exact_knn(index.vectors, q, args.k)
            recalls.append(recall(result.ids, truth.ids))
    if recalls:
        print(f"recall@{args.k}: {sum(recalls) / len(recalls):.4f}")
    return 0


def cmd_exact(args) -> int:
    data = load_dataset(parse_dataset_spec(args.data), args.seed)
    queries = load_dataset(parse_dataset_spec(args.queries), args.seed + 1)
    for i, q in enumerate(queries):
        result = exact_knn(data, q, args.k)
        ids = " ".join(str(v) for v in result.ids.tolist())
        print(f"{i}: {ids}")
    return 0


def cmd_bench(args) -> int:
    _validate_build_args(args)
    if args.reps < 1:
        raise ValueError("--reps must be >= 1")
    data = load_dataset(parse_dataset_spec(args.data), args.seed)
    queries = load_dataset(parse_dataset_spec(args.queries), args.seed + 1)
    rows = []
    for algo in args.algo:
        bench_args = argparse.Namespace(**vars(args))
        bench_args.algo = algo
        build_times, query_times = [], []
        index = None
        for _ in range(args.reps):
            t0 = time.perf_counter()
            index = _build_index(bench_args, data)
            build_times.append(time.perf_counter() - t0)
        params = search_params_for(index, args)
        recalls = []
        for _ in range(args.reps):
            t0 = time.perf_counter()
            per_query = []
            for q in queries:
                result = index.search(q, args.k, **params)
                per_query.append(recall(result.ids, exact_knn(data, q, args.k).ids))
            query_times.append((time.perf_counter() - t0) / len(queries))
            recalls = per_query
        rows.append(
            {
                "algorithm": algo,
                "n": data.shape[0],
                "dim": data.shape[1],
                "k": args.k,
                "reps": args.reps,
                "build_s_median": statistics.median(build_times),
                "query_s_median": statistics.median(query_times),
                "recall_at_k": sum(recalls) / len(recalls),
            }
        )
        print(
            f"{algo}: build median {rows[-1]['build_s_median']:.3f}s, "
            f"query median {rows[-1]['query_s_median'] * 1e3:.3f}ms, "
            f"recall@{args.k} {rows[-1]['recall_at_k']:.4f}"
        )
    if args.out:
        vio.write_report(
            rows,
            columns=[
                "algorithm", "n", "dim", "k", "reps",
                "build_s_median", "query_s_median", "recall_at_k",
            ],
            path=args.out,
        )
    return 0


def cmd_profile(args) -> int:
    index = load_index(args.index)
    queries = load_dataset(parse_dataset_spec(args.queries), args.seed)
    profile = profile_query(index, queries, args.k, search_params_for(index, args))
    save_profiles([profile], args.out)
    print(
        f"{profile.algorithm}: {profile.calls_per_query:.1f} {profile.kernel} "
        f"calls/query at dim {profile.dim} -> {args.out}"
    )
    return 0


def _sweep_rows(result: SweepResult) -> list[dict]:
    rows = []
    for ev in result.evaluations:
        rows.append(
            {
                "algorithm": ev.profile.algorithm,
                "vlen": ev.config.vlen,
                "k": ev.config.k,
                "n": ev.config.n,
                "m": ev.config.m,
                "cycles_per_call": ev.report.cycles_per_call,
                "cycles_per_query": ev.report.cycles_per_query,
                "qps": ev.report.qps,
                "achieved_bandwidth": ev.report.achieved_bandwidth,
            }
        )
    return rows


def run_sweep_parallel(spec: SweepSpec, profiles, latencies, jobs: int) -> SweepResult:
    """Split the vlen grid across processes and merge; identical output to
    the serial sweep because winner merging uses the same total order."""
    from concurrent.futures import ProcessPoolExecutor

    from .vusim import AverageWinner, _tie_key

    subspecs = [
        SweepSpec(
            vlen_grid=(v,), k_grid=spec.k_grid, n_grid=spec.n_grid,
            m_grid=spec.m_grid, freq=spec.freq, bandwidth=spec.bandwidth,
        )
        for v in spec.vlen_grid
    ]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_sweep_worker, [(s, tuple(profiles), latencies) for s in subspecs]))

    merged_evals = [ev for part in parts for ev in part.evaluations]
    per_algorithm = {}
    for part in parts:
        for name, ev in part.per_algorithm.items():
            cur = per_algorithm.get(name)
            if cur is None or (-ev.report.qps, _tie_key(ev.config)) < (
                -cur.report.qps,
                _tie_key(cur.config),
            ):
                per_algorithm[name] = ev
    best = min(
        (part.best_average for part in parts),
        key=lambda w: (-w.mean_qps, _tie_key(w.config)),
    )
    return SweepResult(
        profiles=tuple(profiles),
        per_algorithm=per_algorithm,
        best_average=AverageWinner(
            config=best.config, mean_qps=best.mean_qps,
            mean_bandwidth=best.mean_bandwidth, reports=best.reports,
        ),
        evaluations=merged_evals,
    )


def _sweep_worker(payload):
    spec, profiles, latencies = payload
    return sweep(spec, profiles, latencies)


def cmd_sweep(args) -> int:
    if args.spec:
        spec, latencies = load_sweep_spec(args.spec)
    else:
        spec, latencies = SweepSpec(), DEFAULT_LATENCIES
    profiles = []
    for path in args.profiles:
        profiles.extend(load_profiles(path))
    if args.parallel and args.parallel > 1:
        result = run_sweep_parallel(spec, profiles, latencies, args.parallel)
    else:
        result = sweep(spec, profiles, latencies)
    print(table3_text(result), end="")
    if args.out_csv:
        vio.write_report(
            _sweep_rows(result),
            columns=[
                "algorithm", "vlen", "k", "n", "m",
                "cycles_per_call", "cycles_per_query", "qps", "achieved_bandwidth",
            ],
            path=args.out_csv,
        )
    if args.out_summary:
        cells = table3_cells(result)
        rows = [dict(zip(cells[0], row)) for row in cells[1:]]
        vio.write_report(rows, columns=cells[0], path=args.out_summary)
    return 0


def _add_dataset_arg(p, name: str, help_text: str, required: bool = True) -> None:
    p.add_argument(name, required=required, help=help_text)


def _add_search_params(p) -> None:
    p.add_argument("--nprobe", type=int, default=8, help="cells to probe (IVF family)")
    p.add_argument("--ef-search", type=int, default=128, help="search beam width (NSW/HNSW)")
    p.add_argument("--search-budget", type=int, default=None,
                   help="candidate budget (annoy; default 2*k*n_trees)")


def _add_build_params(p) -> None:
    p.add_argument("--nlist", default="auto", help="IVF cell count or 'auto' (4*sqrt(N))")
    p.add_argument("--pq-chunk", type=int, default=8, help="PQ chunk length in components")
    p.add_argument("--pq-bits", type=int, default=8, help="bits per PQ code component")
    p.add_argument("--nn", type=int, default=16, help="NSW neighbors per insertion")
    p.add_argument("--ef-construction", type=int, default=256, help="build beam width")
    p.add_argument("--M", type=int, default=16, help="HNSW edges per vertex per layer")
    p.add_argument("--hnsw-levels", choices=("geometric", "equal"), default="geometric",
                   help="HNSW level assignment scheme")
    p.add_argument("--n-trees", type=int, default=64, help="annoy tree count")
    p.add_argument("--leaf-cap", type=int, default=16, help="annoy leaf capacity")
    p.add_argument("--iters", type=int, default=25, help="k-means iterations")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vann",
        description="ANN search laboratory: five index algorithms and a "
        "parameterized vector-unit performance model.",
    )
    parser.add_argument("--seed", type=int, default=_default_seed(),
                        help="global seed (or env VANN_SEED)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build an index and persist it")
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    _add_dataset_arg(p, "--data", "dataset spec, e.g. synthetic:n=2000,d=32,clusters=16")
    p.add_argument("--out", required=True, help="output index file")
    _add_build_params(p)
    p.add_argument("--ef-search", type=int, default=128,
                   help="default search beam stored with NSW indexes")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("search", help="query a persisted index")
    p.add_argument("--index", required=True)
    _add_dataset_arg(p, "--queries", "query dataset spec")
    p.add_argument("--k", type=int, default=10)
    _add_search_params(p)
    p.add_argument("--truth", choices=("none", "exact"), default="none",
                   help="compute recall against an exact scan")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("exact", help="exact k-NN scan, no index")
    _add_dataset_arg(p, "--data", "dataset spec")
    _add_dataset_arg(p, "--queries", "query dataset spec")
    p.add_argument("--k", type=int, default=10)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bench", help="timed build/search with recall")
    p.add_argument("--algo", nargs="+", choices=ALGORITHMS, required=True)
    _add_dataset_arg(p, "--data", "dataset spec")
    _add_dataset_arg(p, "--queries", "query dataset spec")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--reps", type=int, default=10, help="repetitions for the medians")
    p.add_argument("--out", default=None, help="CSV output path")
    _add_build_params(p)
    _add_search_params(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("profile", help="measure distance calls per query")
    p.add_argument("--index", required=True)
    _add_dataset_arg(p, "--queries", "query dataset spec")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True, help="profiles JSON output")
    _add_search_params(p)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("sweep", help="vector-unit design-space sweep")
    p.add_argument("--spec", default=None, help="sweep spec JSON (defaults when omitted)")
    p.add_argument("--profiles", nargs="+", required=True, help="profiles JSON files")
    p.add_argument("--out-csv", default=None, help="full evaluation grid CSV")
    p.add_argument("--out-summary", default=None, help="summary table CSV")
    p.add_argument("--parallel", type=int, default=None,
                   help="worker processes for the grid (same output as serial)")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, IndexFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except InfeasibleConfigError as exc:
        print(f"error: infeasible configuration: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
