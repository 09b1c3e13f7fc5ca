"""CHSH basics: the EPR pair, white noise, and two ways to find the optimum.

The seesaw optimizer alternates closed-form updates of Alice's and Bob's
observables; the Horodecki formula reads the optimum off the correlation
matrix. Both must agree.
"""

import numpy as np

from netbell.measurements import horodecki_chsh_max
from netbell.optimize import maximize_chsh
from netbell.states import make_epr, make_ghz, make_werner

print("state                       seesaw      Horodecki")
for label, rho in [
    ("EPR", make_epr().density()),
    ("cos(pi/8)|00>+sin(pi/8)|11>", make_ghz(2, np.pi / 8).density()),
    ("Werner(EPR, v=0.8)", make_werner(make_epr(), 0.8)),
    ("Werner(EPR, v=0.7)", make_werner(make_epr(), 0.7)),
]:
    opt = maximize_chsh(rho)
    print(f"{label:27s} {opt.value:.6f}   {horodecki_chsh_max(rho):.6f}")

# Optimal Bloch angles for the EPR pair
opt = maximize_chsh(make_epr().density())
for name, (theta, phi) in zip(["A0", "A1", "B0", "B1"], opt.settings):
    print(f"{name}: theta={theta:.4f} phi={phi:.4f}")
print("Werner states violate CHSH once v > 1/sqrt(2) =", 1 / np.sqrt(2))
