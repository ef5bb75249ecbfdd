"""How much of a resonator's own noise survives in simple series chains.

An isolated resonator peaks at 4/gamma. Hanging a cavity on it (b1-a1)
broadens the response by the cooperativity; a second cavity (a2-b1-a1)
broadens it further, while a second resonator on the same cavity
(b1-a1-b2) forms a dark mode that keeps half the noise in place.
"""

import numpy as np

from noiseflow import build_dynamics, occupations_lyapunov
from noiseflow.spectral import Setup, series_model, transmission_matrices

for setup in (Setup.TWO_MODE, Setup.SERIES_ABA, Setup.SERIES_BAB):
    model = series_model(setup, G=0.1)
    sys_ = build_dynamics(model)
    peak = transmission_matrices(sys_, np.array([0.0]))[0][sys_.mode_index["b1"], sys_.mode_index["b1"]]
    rep = occupations_lyapunov(sys_)
    print(f"{setup.value:>10}: T_b1b1(0) = {peak:11.5g}   n1 = {rep.n('b1'):9.4g}   T(b1->b1) = {rep.T('b1', 'b1'):.4g}")

print("\nWith a shared cavity the symmetric combination of b1, b2 never couples,")
print("so each resonator keeps roughly m/2 however strong G is.")
