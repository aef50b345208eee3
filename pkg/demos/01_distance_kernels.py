"""Walk through the strip-mined distance kernels and their instruction traces.

The kernels process vectors in register-width chunks: lanes hold partial
sums, the leftover chunk shortens the active vector length, and a binary
tree folds the lane accumulators at the end.  Every call has a matching
instruction trace the cost simulator can price.
"""

import numpy as np

from vann.kernels import (
    scalar_dot,
    scalar_l2_squared,
    strip_mine,
    trace_dot,
    trace_l2,
    vec_dot,
    vec_l2_squared,
)

rng = np.random.default_rng(0)

# --- strip mining -----------------------------------------------------------
# A 2000-feature vector on a 16-lane unit is 125 full chunks; 19 features on
# 8 lanes leave a short tail chunk of 3.
print("strip_mine(2000, 16): ", len(strip_mine(2000, 16)), "chunks, all of 16")
print("strip_mine(19, 8):    ", strip_mine(19, 8))

# --- kernels agree with the scalar references --------------------------------
a = rng.standard_normal(2000).astype(np.float32)
b = rng.standard_normal(2000).astype(np.float32)

s = float(scalar_l2_squared(a, b))
print("\nsquared L2, scalar reference:", f"{s:.6f}")
for lanes in (4, 16, 64):
    v = float(vec_l2_squared(a, b, lanes))
    print(f"  strip-mined with {lanes:3d} lanes: {v:.6f}  (|diff| = {abs(v - s):.2e})")

u = rng.random(2000, dtype=np.float32)
w = rng.random(2000, dtype=np.float32)
s = float(scalar_dot(u, w))
print("dot product, scalar reference:", f"{s:.6f}")
print(f"  strip-mined with 16 lanes:   {float(vec_dot(u, w, 16)):.6f}")

# --- the instruction stream behind one call ----------------------------------
# Per chunk: two loads, a subtract, a fused multiply-accumulate.  The prologue
# sets the vector length and zeroes the accumulator; the epilogue reduces the
# lanes and moves the scalar out.  The dot kernel drops the subtract.
for name, trace in (("L2", trace_l2(2000, 16)), ("dot", trace_dot(2000, 16))):
    counts = {}
    for ins in trace.instructions:
        counts[ins.opcode] = counts.get(ins.opcode, 0) + 1
    print(f"\n{name} trace for d=2000, 16 lanes:")
    for op in ("setvl", "mv_s_to_v", "load", "sub", "macc", "redosum", "mv_v_to_s"):
        if op in counts:
            print(f"  {op:10s} x{counts[op]}")
    print(f"  bytes loaded: {trace.bytes_loaded}, vector registers: {trace.registers_used}")

# A leftover chunk re-issues setvl for the short tail:
tail = trace_l2(17, 16)
print("\nd=17 on 16 lanes issues", sum(1 for i in tail.instructions if i.opcode == "setvl"),
      "setvl instructions (prologue + leftover)")
