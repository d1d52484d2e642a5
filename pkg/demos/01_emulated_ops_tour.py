#!/usr/bin/env python3
"""Tour of the bit-serial emulated operations.

Every arithmetic routine in `apsim.ops` runs as genuine compare/write passes
on an emulated CAM array: numbers are stored bit-transposed along word lines,
and each step matches a column pattern against every line in parallel, then
drives a write-back into the tagged lines.  This script runs each operation
on small inputs, checks the numeric results against plain integer math, and
shows that the instrumented stage counts agree with the closed-form model.
"""

import numpy as np

from apsim import ops
from apsim.ops import ApVariant

rng = np.random.default_rng(7)
M = 4  # operand width in bits


def banner(title):
    print()
    print(f"--- {title} ".ljust(72, "-"))


def show(result, oracle, op, variant, **dims):
    want = ops.analytic_stage_counts(op, variant, M, **dims)
    t = result.trace
    got = (t.n_compare, t.n_write, t.n_read, t.n_transfer)
    ok_vals = np.array_equal(np.asarray(result.values), oracle)
    print(f"  result      : {np.asarray(result.values).tolist()}")
    print(f"  oracle      : {np.asarray(oracle).tolist()}  "
          f"({'match' if ok_vals else 'MISMATCH'})")
    print(f"  stages      : compare={t.n_compare} write={t.n_write} "
          f"read={t.n_read} transfer={t.n_transfer}"
          f"  ({'= closed form' if got == want else f'closed form {want}!'})")
    print(f"  cycle count : {t.stage_total} "
          f"(closed form {ops.analytic_cycles(op, variant, M, **dims)})")
    assert ok_vals and got == want


v = ApVariant.AP2D

banner(f"in-place addition, {M}-bit words, variant {v.value}")
a = rng.integers(0, 1 << M, size=6, dtype=np.int64)
b = rng.integers(0, 1 << M, size=6, dtype=np.int64)
print(f"  a = {a.tolist()}")
print(f"  b = {b.tolist()}")
show(ops.inplace_add(a, b, M, v), a + b, "add", v)

banner(f"multiplication, {M}-bit x {M}-bit -> {2 * M}-bit")
print(f"  a = {a.tolist()}")
print(f"  b = {b.tolist()}")
show(ops.multiply(a, b, M, v), a * b, "multiply", v)

banner(f"ReLU on signed {M}-bit words")
x = rng.integers(-(1 << (M - 1)), 1 << (M - 1), size=8, dtype=np.int64)
print(f"  x = {x.tolist()}")
show(ops.relu(x, M, v), np.maximum(x, 0), "relu", v)

banner("tree reduction: 3 groups of L=4 words")
g = rng.integers(0, 1 << M, size=(3, 4), dtype=np.int64)
print(f"  groups = {g.tolist()}")
show(ops.reduce(g, M, v), g.sum(axis=1), "reduce", v, l=4, k=3)

banner("matrix multiply: (2x4) @ (4x2)")
A = rng.integers(0, 1 << M, size=(2, 4), dtype=np.int64)
B = rng.integers(0, 1 << M, size=(4, 2), dtype=np.int64)
print(f"  A = {A.tolist()}")
print(f"  B = {B.tolist()}")
res = ops.matmat(A, B, M, v)
show(res, A @ B, "matmat", v, i=2, j=4, u=2)

banner("max pooling: 3 windows of S=4")
w = rng.integers(0, 1 << M, size=(3, 4), dtype=np.int64)
print(f"  windows = {w.tolist()}")
show(ops.max_pool(w, M, 4, v), w.max(axis=1), "max_pool", v, s=4, k=3)

banner("average pooling (floor of mean), same windows")
show(ops.avg_pool(w, M, 4, v), w.sum(axis=1) // 4, "avg_pool", v, s=4, k=3)

banner("the three array variants compute identical values")
for variant in ApVariant:
    r = ops.reduce(g, M, variant)
    print(f"  {variant.value:>6}: values={np.asarray(r.values).tolist()}  "
          f"cycles={r.trace.stage_total}")

print()
print("all emulated results matched their oracles and closed forms.")
