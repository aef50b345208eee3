"""Strip-mined distance kernels and their virtual vector-ISA traces.

Two views of the same math live here:

* Scalar references (``scalar_l2_squared``, ``scalar_dot``): strict
  left-to-right float32 accumulation, the ground truth the emulated
  kernels are checked against.
* Strip-mined emulations (``vec_l2_squared``, ``vec_dot``): process the
  input in register-width chunks, keep one float32 accumulator per lane,
  and reduce the lanes with a binary tree at the end.  The leftover
  chunk shortens the active vector length instead of falling back to a
  scalar tail loop.
* Trace builders (``trace_l2``, ``trace_dot``): emit the instruction
  stream those emulations correspond to, for the cost simulator.

Batch helpers (``l2_squared_to_many``, ``dot_to_many``) are the
production entry points the index implementations call; they compute
the identical quantities with float64 accumulation so that candidate
ordering is stable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

OPCODES = frozenset(
    {"setvl", "load", "sub", "add", "macc", "redosum", "mv_s_to_v", "mv_v_to_s"}
)

L2_REGISTERS = 4  # accumulator, two operands, difference
DOT_REGISTERS = 3  # accumulator, two operands


@dataclass(frozen=True)
class Instruction:
    """One virtual vector instruction with the vector length in effect."""

    opcode: str
    active_lanes: int

    def __post_init__(self):
        if self.opcode not in OPCODES:
            raise ValueError(f"unknown opcode {self.opcode!r}")
        if self.active_lanes < 1:
            raise ValueError("active_lanes must be positive")


@dataclass
class InstructionTrace:
    """Instruction multiset for one kernel call.

    bytes_loaded sums active_lanes * 4 over the load instructions;
    registers_used is the peak number of simultaneously live vector
    registers the kernel needs.
    """

    instructions: list[Instruction]
    bytes_loaded: int
    registers_used: int
    _counts: dict[tuple[str, int], int] | None = field(default=None, repr=False)

    def instruction_counts(self) -> dict[tuple[str, int], int]:
        """Histogram of (opcode, active_lanes) pairs, cached."""
        if self._counts is None:
            counts: dict[tuple[str, int], int] = {}
            for ins in self.instructions:
                key = (ins.opcode, ins.active_lanes)
                counts[key] = counts.get(key, 0) + 1
            self._counts = counts
        return self._counts


def _as_vector(x) -> np.ndarray:
    v = np.asarray(x, dtype=np.float32)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if v.size == 0:
        raise ValueError("vector must have at least one component")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite values")
    return v


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    va, vb = _as_vector(a), _as_vector(b)
    if va.shape != vb.shape:
        raise ValueError(f"dimension mismatch: {va.size} vs {vb.size}")
    return va, vb


def strip_mine(d: int, lanes: int) -> list[int]:
    """Chunk lengths for processing a d-element vector with the given lanes.

    Every chunk equals ``lanes`` except possibly the last, which holds
    the ``d mod lanes`` leftover when it is nonzero.
    """
    if d < 1 or lanes < 1:
        raise ValueError("d and lanes must be positive")
    full, rest = divmod(d, lanes)
    chunks = [lanes] * full
    if rest:
        chunks.append(rest)
    return chunks


def scalar_l2_squared(a, b) -> np.float32:
    """Squared Euclidean distance, float32, left-to-right accumulation."""
    va, vb = _pair(a, b)
    sq = (va - vb) ** 2
    return np.cumsum(sq, dtype=np.float32)[-1]


def scalar_dot(a, b) -> np.float32:
    """Dot product, float32, left-to-right accumulation."""
    va, vb = _pair(a, b)
    return np.cumsum(va * vb, dtype=np.float32)[-1]


def _tree_reduce(lanes_acc: np.ndarray) -> np.float32:
    """Binary-tree sum over the lane accumulators, float32 at every level."""
    vals = lanes_acc
    while vals.size > 1:
        half = vals.size // 2
        paired = vals[0 : 2 * half : 2] + vals[1 : 2 * half : 2]
        if vals.size % 2:
            paired = np.concatenate([paired, vals[-1:]])
        vals = paired
    return vals[0]


def _lane_accumulate(terms: np.ndarray, lanes: int) -> np.float32:
    """Accumulate per-element float32 terms chunk by chunk into lane slots.

    Matches the instruction-level semantics: chunk c adds terms[c*lanes + j]
    into lane accumulator j, sequentially over chunks, then the lanes are
    tree-reduced.  np.cumsum performs the strictly sequential float32 adds.
    """
    d = terms.size
    vl0 = min(lanes, d)
    acc = np.zeros(vl0, dtype=np.float32)
    full = d // lanes
    if full:
        body = terms[: full * lanes].reshape(full, lanes)
        acc[:lanes] = np.cumsum(body, axis=0, dtype=np.float32)[-1]
    rest = d - full * lanes
    if rest:
        acc[:rest] = acc[:rest] + terms[full * lanes :]
    return _tree_reduce(acc)


def vec_l2_squared(a, b, lanes: int) -> np.float32:
    """Strip-mined squared L2 distance: per-chunk subtract and
    multiply-accumulate into lane accumulators, then tree reduction."""
    va, vb = _pair(a, b)
    if lanes < 1:
        raise ValueError("lanes must be positive")
    diff = va - vb
    return _lane_accumulate(diff * diff, lanes)


def vec_dot(a, b, lanes: int) -> np.float32:
    """Strip-mined dot product: per-chunk multiply-accumulate, tree reduce."""
    va, vb = _pair(a, b)
    if lanes < 1:
        raise ValueError("lanes must be positive")
    return _lane_accumulate(va * vb, lanes)


def _trace(d: int, lanes: int, with_sub: bool) -> InstructionTrace:
    chunks = strip_mine(d, lanes)
    vl0 = min(lanes, d)
    instrs = [Instruction("setvl", vl0), Instruction("mv_s_to_v", vl0)]
    for c in chunks:
        if c != vl0:
            instrs.append(Instruction("setvl", c))
        instrs.append(Instruction("load", c))
        instrs.append(Instruction("load", c))
        if with_sub:
            instrs.append(Instruction("sub", c))
        instrs.append(Instruction("macc", c))
    instrs.append(Instruction("redosum", vl0))
    instrs.append(Instruction("mv_v_to_s", 1))
    return InstructionTrace(
        instructions=instrs,
        bytes_loaded=2 * d * 4,
        registers_used=L2_REGISTERS if with_sub else DOT_REGISTERS,
    )


def trace_l2(d: int, lanes: int) -> InstructionTrace:
    """Instruction trace of the strip-mined squared-L2 kernel.

    Prologue sets the vector length and zeroes the accumulator; each
    chunk issues two loads, a subtract and a multiply-accumulate (the
    leftover chunk re-issues setvl for the short length); the epilogue
    reduces the lanes and moves the result out.
    """
    return _trace(d, lanes, with_sub=True)


def trace_dot(d: int, lanes: int) -> InstructionTrace:
    """Instruction trace of the strip-mined dot-product kernel (no subtract)."""
    return _trace(d, lanes, with_sub=False)


def l2_squared_to_many(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Squared L2 distances from q to every row of points, float64."""
    diff = points - q
    return np.einsum("ij,ij->i", diff, diff, dtype=np.float64)


def dot_to_many(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Dot products of q with every row of points, float64."""
    return np.einsum("ij,j->i", points, q, dtype=np.float64)
