#!/usr/bin/env python3
"""How operation latency scales with word width and layout variant.

Prints the closed-form cycle counts (single-cycle writes) for each operation
across bit widths, reproducing the reference latency table, and shows the
growth laws: additive ops scale linearly with M, multiplication
quadratically, and the segmented 2D layout removes the group-count term
from reductions and pooling.
"""

import csv
import io

from apsim.ops import ApVariant, analytic_cycles

V1D, V2D, VSEG = ApVariant.AP1D, ApVariant.AP2D, ApVariant.AP2DSeg

print("cycles per operation (single-cycle writes)")
print()
header = f"{'op':<22}" + "".join(f"M={m:<6}" for m in range(1, 9))
print(header)
print("-" * len(header))

rows = []
for label, op, variant, kw in (
    ("add 1d/2d/2dseg", "add", V1D, {}),
    ("multiply", "multiply", V1D, {}),
    ("relu", "relu", V1D, {}),
    ("reduce L=8 (1d)", "reduce", V1D, dict(l=8, k=1)),
    ("reduce L=8 (2d)", "reduce", V2D, dict(l=8, k=1)),
    ("reduce L=8 (2dseg)", "reduce", VSEG, dict(l=8, k=1)),
    ("max_pool S=4 (2d)", "max_pool", V2D, dict(s=4, k=1)),
    ("max_pool S=4 (2dseg)", "max_pool", VSEG, dict(s=4, k=1)),
    ("avg_pool S=4 (2d)", "avg_pool", V2D, dict(s=4, k=1)),
    ("matmat 4x4x4 (2d)", "matmat", V2D, dict(i=4, j=4, u=4)),
):
    vals = [analytic_cycles(op, variant, m, **kw) for m in range(1, 9)]
    rows.append((label, op, variant.value, kw, vals))
    print(f"{label:<22}" + "".join(f"{v:<8}" for v in vals))

print()
print("landmarks: add M=8 -> 89 cycles, multiply M=4 -> 144, relu M=8 -> 33,")
print("           reduce L=8 M=4 (2d) -> 65, max_pool S=4 K=4 M=8 (2dseg) -> 106")
assert analytic_cycles("add", V1D, 8) == 89
assert analytic_cycles("multiply", V1D, 4) == 144
assert analytic_cycles("relu", V1D, 8) == 33
assert analytic_cycles("reduce", V2D, 4, l=8) == 65
assert analytic_cycles("max_pool", VSEG, 8, s=4, k=4) == 106

print()
print("growth laws")
adds = [analytic_cycles("add", V1D, m) for m in (8, 16, 32, 64)]
muls = [analytic_cycles("multiply", V1D, m) for m in (8, 16, 32, 64)]
print(f"  add      M=8,16,32,64 -> {adds}   (x2 width ~ x2 cycles)")
print(f"  multiply M=8,16,32,64 -> {muls}  (x2 width ~ x4 cycles)")

print()
print("group-count sensitivity of reduction (M=4, L=8):")
for k in (1, 4, 16, 64):
    c1 = analytic_cycles("reduce", V1D, 4, l=8, k=k)
    c2 = analytic_cycles("reduce", V2D, 4, l=8, k=k)
    cs = analytic_cycles("reduce", VSEG, 4, l=8, k=k)
    print(f"  K={k:<3}  1d={c1:<6} 2d={c2:<6} 2dseg={cs:<6}"
          "   (2d and 2dseg shift whole column strips: K-independent)")

print()
print("two-cycle writes (resistive arrays) double only the write stages:")
for op, kw in (("add", {}), ("multiply", {}), ("relu", {})):
    c1 = analytic_cycles(op, V1D, 8, **kw)
    c2 = analytic_cycles(op, V1D, 8, write_cycle=2, **kw)
    print(f"  {op:<9} M=8: {c1} -> {c2} cycles")

buf = io.StringIO()
writer = csv.writer(buf)
writer.writerow(["operation", "variant", "dims"] +
                [f"m{m}" for m in range(1, 9)])
for label, op, variant, kw, vals in rows:
    writer.writerow([op, variant,
                     ";".join(f"{k}={v}" for k, v in kw.items())] + vals)
print()
print("machine-readable copy of the table above:")
print(buf.getvalue())
