"""Acceptance criteria: one test per criterion, each printing a PASS line.

Run with `pytest -s tests/test_acceptance.py` to see the per-criterion
lines and timings.
"""

import itertools
import time

import numpy as np
import pytest

from vann.ann import (
    annoy_build,
    annoy_search,
    default_nlist,
    exact_knn,
    hnsw_build,
    hnsw_search,
    ivfflat_build,
    ivfflat_search,
    ivfpq_build,
    ivfpq_search,
    nsw_build,
    nsw_search,
    pq_adc_distance,
    profile_query,
    recall,
)
from vann.errors import InfeasibleConfigError, ParseError
from vann.io import load_glove, load_libsvm, synthetic_gaussian
from vann.kernels import (
    scalar_dot,
    scalar_l2_squared,
    trace_l2,
    vec_dot,
    vec_l2_squared,
)
from vann.persist import load_index, save_index
from vann.vusim import (
    SweepSpec,
    VectorUnitConfig,
    WorkloadProfile,
    qps,
    simulate_trace,
    sweep,
    table3_cells,
)

# Calibration constants: recall@10 measured on the seeded acceptance dataset
# (10000x32, 16 clusters, 500 queries, seeds 101/102) with the default search
# parameters.  Derived by running this suite; small drift across BLAS builds
# is tolerated below, the hard floor is 0.60.
CALIBRATED_RECALL = {
    "ivfflat": 0.7750,
    "ivfpq": 0.7590,
    "nsw": 1.0000,
    "hnsw": 1.0000,
    "annoy": 1.0000,
}


def report(criterion, elapsed, limit, detail=""):
    print(f"ACCEPTANCE {criterion}: PASS ({elapsed:.1f}s < {limit}s) {detail}")


def test_criterion_1_kernel_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1000)
    for d in (1, 7, 100, 2000):
        for _ in range(1000):
            a = rng.standard_normal(d).astype(np.float32)
            b = rng.standard_normal(d).astype(np.float32)
            # dot products of zero-mean pairs cancel toward zero where any
            # float32 kernel is accumulation-noise bound; positive inputs
            # keep the relative bound meaningful
            au = rng.random(d, dtype=np.float32)
            bu = rng.random(d, dtype=np.float32)
            s_l2 = float(scalar_l2_squared(a, b))
            s_dot = float(scalar_dot(au, bu))
            for lanes in (4, 16, 64):
                v = float(vec_l2_squared(a, b, lanes))
                assert abs(v - s_l2) <= 1e-5 * max(1.0, abs(s_l2))
                v = float(vec_dot(au, bu, lanes))
                assert abs(v - s_dot) <= 1e-5 * max(1.0, abs(s_dot))
    elapsed = time.perf_counter() - t0
    assert elapsed < 10
    report(1, elapsed, 10, "vec kernels match scalar references @1e-5")


@pytest.fixture(scope="module")
def small_suite():
    data = synthetic_gaussian(2000, 32, 16, seed=11)
    queries = synthetic_gaussian(200, 32, 16, seed=12)
    truth = [exact_knn(data, q, 10) for q in queries]
    return data, queries, truth


def test_criterion_2_exhaustive_parameters_equal_exact(small_suite):
    data, queries, truth = small_suite
    t0 = time.perf_counter()
    n = data.shape[0]
    ivf = ivfflat_build(data, nlist=default_nlist(n), seed=1)
    nsw = nsw_build(data, nn=16, ef_construction=256, seed=1)
    forest = annoy_build(data, n_trees=64, leaf_cap=16, seed=1)
    for q, t in zip(queries, truth):
        assert ivfflat_search(ivf, q, 10, nprobe=ivf.nlist).ids.tolist() == t.ids.tolist()
        assert nsw_search(nsw, q, 10, ef_search=n).ids.tolist() == t.ids.tolist()
        assert annoy_search(forest, q, 10, search_budget=n).ids.tolist() == t.ids.tolist()
    elapsed = time.perf_counter() - t0
    assert elapsed < 60
    report(2, elapsed, 60, "nprobe=nlist / ef=n / budget=n reproduce exact ids")


@pytest.fixture(scope="module")
def recall_suite():
    t0 = time.perf_counter()
    data = synthetic_gaussian(10000, 32, 16, seed=101)
    queries = synthetic_gaussian(500, 32, 16, seed=102)
    nlist = default_nlist(10000)
    indexes = {
        "ivfflat": (ivfflat_build(data, nlist=nlist, seed=1), {"nprobe": 8}),
        # chunking scaled to the 32-dim dataset the way the reference
        # datasets scale theirs: dsub=2, 8-bit codes
        "ivfpq": (ivfpq_build(data, nlist=nlist, M=16, ksub=256, seed=1), {"nprobe": 8}),
        "nsw": (nsw_build(data, nn=16, ef_construction=256, seed=1), {"ef_search": 128}),
        "hnsw": (hnsw_build(data, M=16, ef_construction=256, seed=1), {"ef_search": 128}),
        "annoy": (annoy_build(data, n_trees=64, leaf_cap=16, seed=1), {}),
    }
    build_s = time.perf_counter() - t0
    return data, queries, indexes, build_s


SEARCHERS = {
    "ivfflat": ivfflat_search,
    "ivfpq": ivfpq_search,
    "nsw": nsw_search,
    "hnsw": hnsw_search,
    "annoy": annoy_search,
}


def test_criterion_3_recall_sanity(recall_suite):
    data, queries, indexes, build_s = recall_suite
    t0 = time.perf_counter()
    truth = [exact_knn(data, q, 10) for q in queries]
    baseline = 10 / data.shape[0]  # expected recall of a random-k answer
    measured = {}
    for name, (index, params) in indexes.items():
        search = SEARCHERS[name]
        r = float(
            np.mean(
                [recall(search(index, q, 10, **params).ids, t.ids)
                 for q, t in zip(queries, truth)]
            )
        )
        measured[name] = r
        assert r >= 0.60, f"{name} recall {r:.4f} below floor"
        assert r > baseline
        assert r == pytest.approx(CALIBRATED_RECALL[name], abs=0.02), (
            f"{name} drifted from calibrated {CALIBRATED_RECALL[name]}: {r:.4f}"
        )
    elapsed = build_s + (time.perf_counter() - t0)
    assert elapsed < 300
    detail = " ".join(f"{k}={v:.3f}" for k, v in measured.items())
    report(3, elapsed, 300, detail)


def test_criterion_4_ivfpq_formula():
    t0 = time.perf_counter()
    rng = np.random.default_rng(44)
    for _ in range(10_000):
        M, ksub = int(rng.integers(1, 17)), int(rng.integers(1, 17))
        table = rng.standard_normal((M, ksub)).astype(np.float32)
        code = rng.integers(0, ksub, size=M)
        acc = 0.0
        for m in range(M):
            acc += float(table[m, code[m]])
        assert pq_adc_distance(table, code) == acc

    # perfect codebook: every residual chunk is exactly a sub-centroid, so
    # the ADC ranking reproduces the exact ranking
    data = rng.choice(np.array([0.0, 1.0, 2.0], dtype=np.float32), size=(500, 8))
    index = ivfpq_build(data, nlist=1, M=4, ksub=9, seed=44)
    for _ in range(25):
        q = rng.standard_normal(8).astype(np.float32)
        got = ivfpq_search(index, q, 10, nprobe=1)
        want = exact_knn(data, q, 10)
        assert got.ids.tolist() == want.ids.tolist()
    elapsed = time.perf_counter() - t0
    assert elapsed < 30
    report(4, elapsed, 30, "bit-level ADC sums; perfect-codebook ranking exact")


def test_criterion_5_simulator_hand_oracle():
    t0 = time.perf_counter()
    # Hand derivation at vlen=512 (16 lanes), n=m=16, 1.85 GHz, 29.8 GB/s:
    #   prologue setvl+mv             = 2
    #   125 chunks of (2 loads @ max(1, ceil(64B/16.108 B/cyc)) = 4 cycles,
    #                  sub 3 + ceil(16/16) - 1 = 3, macc 6 + 1 - 1 = 6) = 125*17 = 2125
    #   redosum 3 * ceil(log2 16)     = 12
    #   mv_v_to_s                     = 1
    #   total                         = 2140
    config = VectorUnitConfig(vlen=512, k=4, n=16, m=16, freq=1.85e9, bandwidth=29.8e9)
    cost = simulate_trace(trace_l2(2000, 16), config)
    assert cost.cycles == 2140
    elapsed = time.perf_counter() - t0
    report(5, elapsed, 30, "trace_l2(2000,16) prices to exactly 2140 cycles")


def brute_force_winner(spec, profiles):
    """Independent argmax with the documented tie order."""
    best_per, best_avg = {}, None
    for vlen, k, n, m in itertools.product(
        spec.vlen_grid, spec.k_grid, spec.n_grid, spec.m_grid
    ):
        cfg = VectorUnitConfig(vlen=vlen, k=k, n=n, m=m, freq=spec.freq,
                               bandwidth=spec.bandwidth)
        reports = {}
        for p in profiles:
            try:
                reports[p.algorithm] = qps(p, cfg)
            except InfeasibleConfigError:
                continue
        for name, rep in reports.items():
            key = (-rep.qps, cfg.vlen, cfg.n + cfg.m, cfg.k, cfg.n, cfg.m)
            if name not in best_per or key < best_per[name][0]:
                best_per[name] = (key, cfg)
        if len(reports) == len(profiles):
            mean = sum(r.qps for r in reports.values()) / len(reports)
            key = (-mean, cfg.vlen, cfg.n + cfg.m, cfg.k, cfg.n, cfg.m)
            if best_avg is None or key < best_avg[0]:
                best_avg = (key, cfg)
    return {name: cfg for name, (_, cfg) in best_per.items()}, best_avg[1]


def test_criterion_6_simulator_properties():
    t0 = time.perf_counter()
    rng = np.random.default_rng(66)
    for _ in range(200):
        vlen = 32 * int(rng.choice([4, 8, 16, 32, 64, 128, 512]))
        n = int(rng.choice([1, 2, 4, 8, 16, 32, 64]))
        m = int(rng.choice([1, 2, 4, 8, 16, 32, 64]))
        bw = float(rng.uniform(1e9, 2e11))
        profile = WorkloadProfile(
            "x", dim=int(rng.integers(1, 3000)),
            calls_per_query=float(rng.uniform(1, 1e5)),
        )
        base_cfg = VectorUnitConfig(vlen=vlen, k=4, n=n, m=m, bandwidth=bw)
        base = qps(profile, base_cfg)
        assert qps(profile, VectorUnitConfig(vlen=vlen, k=4, n=2 * n, m=m, bandwidth=bw)
                   ).cycles_per_call <= base.cycles_per_call
        assert qps(profile, VectorUnitConfig(vlen=vlen, k=4, n=n, m=2 * m, bandwidth=bw)
                   ).cycles_per_call <= base.cycles_per_call
        assert qps(profile, VectorUnitConfig(vlen=vlen, k=4, n=n, m=m, bandwidth=2 * bw)
                   ).cycles_per_call <= base.cycles_per_call
        assert base.achieved_bandwidth <= bw * (1 + 1e-12)
        for k in (8, 16, 32):
            assert qps(profile, VectorUnitConfig(vlen=vlen, k=k, n=n, m=m, bandwidth=bw)) == base

    spec = SweepSpec(vlen_grid=(128, 512, 2048), k_grid=(4, 8),
                     n_grid=(1, 8, 64), m_grid=(1, 8, 64))
    profiles = (
        WorkloadProfile("a", dim=2000, calls_per_query=430.0),
        WorkloadProfile("b", dim=100, calls_per_query=5441.0),
        WorkloadProfile("c", dim=8, calls_per_query=60000.0),
    )
    result = sweep(spec, profiles)
    expect_per, expect_avg = brute_force_winner(spec, profiles)
    for name, cfg in expect_per.items():
        assert result.per_algorithm[name].config == cfg
    assert result.best_average.config == expect_avg
    elapsed = time.perf_counter() - t0
    assert elapsed < 60
    report(6, elapsed, 60, "monotonicity, k-neutrality, bandwidth cap, argmax oracle")


def test_criterion_7_table3_qualitative(recall_suite):
    data, queries, indexes, _ = recall_suite
    t0 = time.perf_counter()
    profiles = [
        profile_query(index, queries[:25], 10, params)
        for index, params in indexes.values()
    ]
    result = sweep(SweepSpec(), profiles)
    cells = table3_cells(result)
    assert cells[0] == [""] + [p.algorithm for p in profiles] + ["Best on average"]
    assert [row[0] for row in cells[1:]] == ["k", "vlen", "n", "m", "bandwidth (GB/s)", "Q/s"]
    # register-count neutrality plus the smallest-k tie-break puts k=4 in
    # every winner column
    assert cells[1][1:] == ["4"] * (len(profiles) + 1)
    # average-column bandwidth is the mean over algorithms at that config
    avg = result.best_average
    assert avg.mean_bandwidth == pytest.approx(
        sum(r.achieved_bandwidth for r in avg.reports) / len(avg.reports)
    )
    assert cells[5][-1] == f"{avg.mean_bandwidth / 1e9:.1f}"
    elapsed = time.perf_counter() - t0
    assert elapsed < 300
    winners = {p.algorithm: result.per_algorithm[p.algorithm].config for p in profiles}
    detail = "; ".join(
        f"{name}: vlen={c.vlen} n={c.n} m={c.m}" for name, c in winners.items()
    )
    report(7, elapsed, 300, detail)


def test_criterion_8_persistence_round_trip(tmp_path):
    t0 = time.perf_counter()
    data = synthetic_gaussian(800, 16, 4, seed=88)
    queries = synthetic_gaussian(100, 16, 4, seed=89)
    cases = {
        "ivfflat": (ivfflat_build(data, nlist=32, seed=8), {"nprobe": 8}),
        "ivfpq": (ivfpq_build(data, nlist=8, M=4, ksub=64, seed=8), {"nprobe": 4}),
        "nsw": (nsw_build(data, nn=16, ef_construction=64, seed=8), {"ef_search": 64}),
        "hnsw": (hnsw_build(data, M=16, ef_construction=64, seed=8), {"ef_search": 64}),
        "annoy": (annoy_build(data, n_trees=16, leaf_cap=16, seed=8), {}),
    }
    for name, (index, params) in cases.items():
        path = tmp_path / f"{name}.vann"
        save_index(index, path)
        loaded = load_index(path)
        for q in queries:
            a = index.search(q, 10, **params)
            b = loaded.search(q, 10, **params)
            assert a.ids.tobytes() == b.ids.tobytes(), name
            assert a.distances.tobytes() == b.distances.tobytes(), name
    elapsed = time.perf_counter() - t0
    assert elapsed < 60
    report(8, elapsed, 60, "five index types round-trip bit-exactly")


def test_criterion_9_loader_bit_exactness(tmp_path):
    t0 = time.perf_counter()
    svm = tmp_path / "sample.svm"
    svm.write_text("1 1:0.5 3:-0.25\n-1\n")
    vectors, labels = load_libsvm(svm, dim=4)
    assert vectors.tolist() == [[0.5, 0.0, -0.25, 0.0], [0.0, 0.0, 0.0, 0.0]]
    assert labels.tolist() == [1.0, -1.0]

    glove = tmp_path / "sample.txt"
    glove.write_text("the 0.1 -0.2 0.3\n")
    gvecs, tokens = load_glove(glove)
    assert tokens == ["the"]
    assert gvecs.tolist() == [
        [np.float32(0.1), np.float32(-0.2), np.float32(0.3)]
    ]

    bad_svm = tmp_path / "bad.svm"
    bad_svm.write_text("1 1:0.5\n1 oops\n")
    with pytest.raises(ParseError, match=r"bad\.svm:2"):
        load_libsvm(bad_svm, dim=4)
    bad_glove = tmp_path / "bad.txt"
    bad_glove.write_text("a 1.0 2.0\nb 3.0\n")
    with pytest.raises(ParseError, match=r"bad\.txt:2"):
        load_glove(bad_glove)
    elapsed = time.perf_counter() - t0
    assert elapsed < 5
    report(9, elapsed, 5, "documented lines parse exactly; errors carry line numbers")
