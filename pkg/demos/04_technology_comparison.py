#!/usr/bin/env python3
"""SRAM vs ReRAM arrays, and what voltage scaling buys.

Resistive cells pay orders of magnitude more energy per write than SRAM
cells, but writes are only a slice of the schedule, so the end-to-end gap
is far smaller than the per-cell gap and shrinks as precision grows (wider
words spend relatively more time comparing than writing).  This script runs
VGG-16 at every fixed precision from 2 to 8 bits on both technologies.

It then drops the SRAM supply to 0.5 V: per-cell write energy collapses
fourfold, but end-to-end energy barely moves because compare passes and
interconnect dominate - the real price of the low-voltage corner is the
raised bit-error probability reported by the profile.
"""

from apsim.report import simulate
from apsim.tech import apply_voltage, load_profile

sram = load_profile("sram16nm")
reram = load_profile("reram16nm")

print("VGG-16, LR hardware: ReRAM / SRAM end-to-end ratios by precision")
print()
hdr = (f"{'bits':<6}{'E sram [J]':>12}{'E reram [J]':>13}{'E ratio':>9}"
       f"{'L ratio':>9}")
print(hdr)
print("-" * len(hdr))
for bits in range(2, 9):
    rs = simulate("vgg16", f"fixed:{bits}", tech=sram)
    rr = simulate("vgg16", f"fixed:{bits}", tech=reram)
    print(f"{bits:<6}{rs.energy_j:>12.3f}{rr.energy_j:>13.2f}"
          f"{rr.energy_j / rs.energy_j:>9.1f}"
          f"{rr.latency_s / rs.latency_s:>9.2f}")

print()
print(f"per-cell write energy gap: {reram.e_write_cell / sram.e_write_cell:,.0f}x")
print("end-to-end gap: only ~60-80x, decreasing with precision, because")
print("compares, reads and the mesh are technology-neutral here and ReRAM")
print("writes take two array cycles instead of one (the ~2x latency ratio).")

print()
print("SRAM voltage corner (fixed:8)")
low = apply_voltage(sram, 0.5)
for model in ("alexnet", "vgg16", "resnet50"):
    base = simulate(model, "fixed:8", tech=sram)
    drop = simulate(model, "fixed:8", tech=low)
    delta = abs(drop.energy_j - base.energy_j) / base.energy_j
    print(f"  {model:<10} E(1.0V)={base.energy_j:8.3f} J   "
          f"E(0.5V)={drop.energy_j:8.3f} J   delta={delta:.4%}")
print(f"  write energy per cell falls {sram.e_write_cell / low.e_write_cell:.0f}x "
      f"at 0.5 V (V^2 scaling), yet totals move <0.1%: SRAM writes are a")
print("  sliver of the budget next to compare passes and mesh transfers.")
print(f"  the corner's cost is reliability: bit-error probability "
      f"{low.p_bit_error:.3f} vs {sram.p_bit_error:.3f} at nominal supply.")
