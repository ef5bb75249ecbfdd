"""Unequal cavity linewidths still allow isolation if the couplings compensate.

With kappa2 < kappa1 the second path is stronger, so the cancellation at
Phi = pi is only complete when G11 G12 kappa2 = G21 G22 kappa1. Sweeping the
ratio G21/G12 shows the valley in n1 sitting near that matched value; the
small offset is the finite resonator bandwidth.
"""

import math

from noiseflow import plaquette
from noiseflow.conditions import impedance_kappa_check
from noiseflow.sweep import Axis, SweepSpec, apply_override, run_sweep

base = plaquette(0.1, phase=math.pi, kappa=(1.0, 0.5), occupations=(1e3, 1e5))
ratios = tuple(x / 20 for x in range(4, 21))
table = run_sweep(SweepSpec(base, (Axis("ratio:G21/G12", ratios),), ("n_bar:b1", "residual:impedance")))

for ratio, n1, res in zip(table.column("ratio:G21/G12"), table.column("n_bar:b1"), table.column("residual:impedance")):
    print(f"G21/G12 = {ratio:4.2f}   n1 = {n1:9.4g}   matching residual = {res:.3f}")

matched = apply_override(base, "ratio:G21/G12", 0.5)
print(f"\nmatched point G21/G12 = 0.5: residual {impedance_kappa_check(matched).residual:.1e}")
