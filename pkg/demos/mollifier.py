# # Smoothing a step function by local barycenters
#
# A_eta(g) is the barycenter of the values of A on a small window around g.
# For a step function the smoothed version differs from A only near the
# jumps, so the L1 distance shrinks roughly like eta / 2 per unit jump.

import numpy as np

from hadamard_means import (
    GOLDEN,
    KroneckerSystem,
    MollifierConfig,
    SPDSpace,
    check_mollifier_stability,
    l1_distance,
    mollified_function,
)
from hadamard_means import functions as fns

S = SPDSpace(3)
rot = KroneckerSystem.torus(GOLDEN)
A = fns.spd_step(3, split=0.5, jump=1.0)

for eta in (0.2, 0.1, 0.05, 0.01):
    Ae = mollified_function(A, MollifierConfig(eta), rot, S)
    print(f"eta={eta:<5} l1(A, A_eta) = {l1_distance(A, Ae, 4000, rot, S):.5f}")

# Near a jump the smoothed values interpolate along the geodesic.

Ae = mollified_function(A, MollifierConfig(0.1), rot, S)
for g in np.linspace(0.45, 0.55, 5):
    print(f"g={g:.3f}  d(A_eta(g), I) = {S.distance(Ae(g), np.eye(3)):.3f}")

# Functions that are close in L1 have uniformly close mollifications.

B = fns.perturb(A, 0.7, 0.004)
res = check_mollifier_stability(A, B, MollifierConfig(0.1, 200), rot, S, eps=0.05)
print("max d(A_eta, B_eta) =", res.lhs, "<= eps =", res.rhs)
