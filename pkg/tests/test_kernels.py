"""Distance kernels: scalar references, strip-mined emulation, traces."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vann.kernels import (
    scalar_dot,
    scalar_l2_squared,
    strip_mine,
    trace_dot,
    trace_l2,
    vec_dot,
    vec_l2_squared,
)


def f32_pair(d, seed):
    rng = np.random.default_rng(seed)
    return (
        rng.standard_normal(d).astype(np.float32),
        rng.standard_normal(d).astype(np.float32),
    )


def l2_oracle(a, b) -> float:
    """Independent double-precision loop."""
    return sum((float(x) - float(y)) ** 2 for x, y in zip(a, b))


def dot_oracle(a, b) -> float:
    return sum(float(x) * float(y) for x, y in zip(a, b))


class TestStripMine:
    def test_divisible(self):
        chunks = strip_mine(2000, 16)
        assert chunks == [16] * 125

    def test_single_short_chunk(self):
        assert strip_mine(5, 8) == [5]

    def test_leftover(self):
        assert strip_mine(19, 8) == [8, 8, 3]

    def test_invalid(self):
        with pytest.raises(ValueError):
            strip_mine(0, 8)
        with pytest.raises(ValueError):
            strip_mine(8, 0)

    @given(d=st.integers(1, 4096), lanes=st.integers(1, 512))
    def test_properties(self, d, lanes):
        chunks = strip_mine(d, lanes)
        assert sum(chunks) == d
        assert all(c == lanes for c in chunks[:-1])
        assert sum(1 for c in chunks if c != lanes) <= 1
        if d % lanes:
            assert chunks[-1] == d % lanes


class TestScalarKernels:
    def test_l2_identity(self):
        a, _ = f32_pair(64, 0)
        assert scalar_l2_squared(a, a) == 0.0

    def test_l2_forced(self):
        assert scalar_l2_squared([1.0, 0.0], [0.0, 1.0]) == 2.0

    def test_dot_forced(self):
        assert scalar_dot([1, 2, 3], [4, 5, 6]) == 32.0

    def test_dot_orthogonal(self):
        assert scalar_dot([1, 0, 0], [0, 1, 0]) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_l2_matches_float64_oracle_d2000(self, seed):
        a, b = f32_pair(2000, seed)
        expected = l2_oracle(a, b)
        assert abs(float(scalar_l2_squared(a, b)) - expected) <= 1e-5 * max(1.0, abs(expected))

    @pytest.mark.parametrize("seed", range(5))
    def test_dot_matches_float64_oracle_d2000(self, seed):
        a, b = f32_pair(2000, seed)
        expected = dot_oracle(a, b)
        assert abs(float(scalar_dot(a, b)) - expected) <= 1e-5 * max(1.0, abs(expected))

    def test_left_to_right_accumulation_bit_exact(self):
        # The contract is a strict sequential float32 fold, element order as given.
        a, b = f32_pair(501, 7)
        acc = np.float32(0.0)
        for x, y in zip(a, b):
            diff = np.float32(x - y)
            acc = np.float32(acc + np.float32(diff * diff))
        assert scalar_l2_squared(a, b).tobytes() == acc.tobytes()

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            scalar_l2_squared([1.0, 2.0], [1.0])
        with pytest.raises(ValueError, match="mismatch"):
            scalar_dot([1.0, 2.0], [1.0])

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            scalar_l2_squared([np.inf, 0.0], [0.0, 0.0])


def _reference_lane_kernel(a, b, lanes, subtract):
    """Chunk-by-chunk float32 emulation written as explicit loops."""
    a = np.asarray(a, np.float32)
    b = np.asarray(b, np.float32)
    d = a.size
    vl0 = min(lanes, d)
    acc = np.zeros(vl0, dtype=np.float32)
    for start in range(0, d, lanes):
        av, bv = a[start : start + lanes], b[start : start + lanes]
        terms = (av - bv) * (av - bv) if subtract else av * bv
        acc[: terms.size] = acc[: terms.size] + terms
    vals = acc
    while vals.size > 1:
        half = vals.size // 2
        nxt = vals[0 : 2 * half : 2] + vals[1 : 2 * half : 2]
        if vals.size % 2:
            nxt = np.append(nxt, vals[-1])
        vals = nxt
    return vals[0]


class TestVectorKernels:
    @pytest.mark.parametrize("lanes", [1, 3, 4, 16, 64])
    def test_l2_identity_any_lanes(self, lanes):
        a, _ = f32_pair(37, 1)
        assert vec_l2_squared(a, a, lanes) == 0.0

    def test_l2_leftover_path(self):
        a, b = f32_pair(7, 2)
        got = float(vec_l2_squared(a, b, 4))
        want = float(scalar_l2_squared(a, b))
        assert abs(got - want) <= 1e-5 * max(1.0, abs(want))

    def test_l2_d2000(self):
        a, b = f32_pair(2000, 3)
        got = float(vec_l2_squared(a, b, 16))
        want = float(scalar_l2_squared(a, b))
        assert abs(got - want) <= 1e-5 * max(1.0, abs(want))

    def test_dot_forced(self):
        got = float(vec_dot([1, 2, 3], [4, 5, 6], 2))
        assert abs(got - 32.0) <= 1e-5 * 32.0

    def test_dot_zero_vector(self):
        z = np.zeros(9, dtype=np.float32)
        a, _ = f32_pair(9, 4)
        assert vec_dot(z, a, 4) == 0.0

    def test_dot_d2000(self):
        a, b = f32_pair(2000, 5)
        got = float(vec_dot(a, b, 16))
        want = dot_oracle(a, b)
        assert abs(got - want) <= 1e-5 * max(1.0, abs(want))

    @pytest.mark.parametrize("d,lanes", [(1, 4), (7, 4), (64, 16), (100, 8), (2000, 16)])
    def test_matches_reference_emulation_bit_exact(self, d, lanes):
        a, b = f32_pair(d, d + lanes)
        assert vec_l2_squared(a, b, lanes).tobytes() == _reference_lane_kernel(
            a, b, lanes, subtract=True
        ).tobytes()
        assert vec_dot(a, b, lanes).tobytes() == _reference_lane_kernel(
            a, b, lanes, subtract=False
        ).tobytes()

    def test_symmetry_bit_exact(self):
        a, b = f32_pair(123, 9)
        for lanes in (1, 4, 16, 123, 512):
            assert vec_l2_squared(a, b, lanes).tobytes() == vec_l2_squared(b, a, lanes).tobytes()

    @settings(max_examples=80, deadline=None)
    @given(
        seed=st.integers(0, 2**31 - 1),
        d=st.integers(1, 4096),
        lanes=st.sampled_from([1, 2, 4, 8, 16, 32, 64, 128, 256, 512]),
    )
    def test_vec_scalar_agreement_property(self, seed, d, lanes):
        # Random draws, not adversarial constants: the bound measures
        # reordering differences, not the worst case of float32 summation.
        a, b = f32_pair(d, seed)
        s = float(scalar_l2_squared(a, b))
        v = float(vec_l2_squared(a, b, lanes))
        assert abs(v - s) <= 1e-5 * max(1.0, abs(s))
        # Dot products of zero-mean data cancel towards zero, where any
        # float32 accumulation is noise-bound; positive inputs keep the
        # relative tolerance meaningful.
        rng = np.random.default_rng(seed)
        a, b = rng.random(d, dtype=np.float32), rng.random(d, dtype=np.float32)
        s = float(scalar_dot(a, b))
        v = float(vec_dot(a, b, lanes))
        assert abs(v - s) <= 1e-5 * max(1.0, abs(s))


def opcode_counts(trace):
    out = {}
    for ins in trace.instructions:
        out[ins.opcode] = out.get(ins.opcode, 0) + 1
    return out


class TestTraces:
    def test_l2_2000_16(self):
        t = trace_l2(2000, 16)
        counts = opcode_counts(t)
        assert counts == {
            "load": 250,
            "sub": 125,
            "macc": 125,
            "setvl": 1,
            "redosum": 1,
            "mv_s_to_v": 1,
            "mv_v_to_s": 1,
        }
        assert t.bytes_loaded == 16000
        assert t.registers_used == 4

    def test_l2_single_chunk(self):
        counts = opcode_counts(trace_l2(16, 16))
        assert counts["load"] == 2 and counts["sub"] == 1 and counts["macc"] == 1
        assert counts["setvl"] == 1

    def test_l2_leftover_emits_extra_setvl(self):
        counts = opcode_counts(trace_l2(17, 16))
        assert counts["load"] == 4 and counts["sub"] == 2 and counts["macc"] == 2
        assert counts["setvl"] == 2

    def test_dot_2000_16(self):
        counts = opcode_counts(trace_dot(2000, 16))
        assert counts["load"] == 250 and counts["macc"] == 125
        assert "sub" not in counts

    def test_dot_single_chunk(self):
        counts = opcode_counts(trace_dot(16, 16))
        assert counts["load"] == 2 and counts["macc"] == 1

    def test_dot_tiny_bytes(self):
        assert trace_dot(1, 16).bytes_loaded == 8

    def test_registers(self):
        assert trace_l2(100, 8).registers_used <= 4
        assert trace_dot(100, 8).registers_used <= 3

    @given(d=st.integers(1, 4096), lanes=st.sampled_from([1, 2, 4, 8, 16, 64, 256, 512]))
    @settings(max_examples=60, deadline=None)
    def test_bytes_loaded_property(self, d, lanes):
        assert trace_l2(d, lanes).bytes_loaded == 2 * d * 4
        assert trace_dot(d, lanes).bytes_loaded == 2 * d * 4
        # bytes_loaded is consistent with the load instructions themselves
        t = trace_l2(d, lanes)
        assert (
            sum(i.active_lanes * 4 for i in t.instructions if i.opcode == "load")
            == t.bytes_loaded
        )

    def test_instruction_counts_cached(self):
        t = trace_l2(33, 8)
        counts = t.instruction_counts()
        assert counts is t.instruction_counts()
        assert sum(counts.values()) == len(t.instructions)
