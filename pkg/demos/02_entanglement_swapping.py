"""Entanglement swapping on two copies of a tripartite GHZ source.

For each test W_UV, the pair (U, U^2) is measured in the X basis, the pair
(V, V^2) is Bell-measured jointly and the remaining pair (W, W^2) - which
never interacted - is left in a post-selected state. We count how many of
the 16 conditioning outcomes leave it maximally entangled.
"""

import numpy as np

from netbell.network import global_state, tripartite_inflation
from netbell.states import make_ghz
from netbell.swapping import count_epr_outcomes

net = tripartite_inflation()
for theta in (0.0, np.pi / 8, np.pi / 4, 3 * np.pi / 8):
    psi = global_state(net, make_ghz(3, theta))
    counts = {t.name: count_epr_outcomes(psi, t)[0] for t in net.tests}
    print(f"theta={theta:.4f}: {counts}")

# Per-outcome detail for one test
psi = global_state(net, make_ghz(3, np.pi / 8))
_, detail = count_epr_outcomes(psi, net.test("W_AB"))
print("\noutcome (x_A, x_A2, bell)  probability  Schmidt spectrum  maximally entangled")
for d in detail:
    spec = ", ".join(f"{s:.4f}" for s in d.schmidt)
    print(f"{str(d.outcome):27s} {d.probability:.4f}       [{spec}]  {d.maximally_entangled}")
