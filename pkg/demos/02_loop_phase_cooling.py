"""Cooling both resonators of the plaquette by tuning the loop phase.

At Phi = 0 the two cavity paths add and leave a dark resonator mode at the
bath temperature. At Phi = pi they cancel, each resonator sees only its own
two cavities, and both reach the dual-cavity limit even when the other
resonator sits in a much hotter bath.
"""

import math

from noiseflow import build_dynamics, occupations_lyapunov, plaquette
from noiseflow.steady import dual_cavity_limit_of

print(f"{'Phi/pi':>7} {'n1':>10} {'n2':>10} {'T(b2->b1)':>11}")
for frac in (0.0, 0.25, 0.5, 0.75, 0.9, 1.0):
    rep = occupations_lyapunov(build_dynamics(plaquette(0.1, phase=frac * math.pi)))
    print(f"{frac:7.2f} {rep.n('b1'):10.4g} {rep.n('b2'):10.4g} {rep.T('b2', 'b1'):11.3e}")

model = plaquette(0.1, phase=math.pi, occupations=(1e3, 1e5))
rep = occupations_lyapunov(build_dynamics(model))
print(f"\nb2 bath raised to 1e5: n1 = {rep.n('b1'):.4g}, dual-cavity limit {dual_cavity_limit_of(model, 'b1'):.4g}")
