# # Geometry of the SPD cone
#
# Symmetric positive definite matrices with the affine-invariant metric form
# a Hadamard space. This script computes a few distances and geodesics, and
# checks the comparison inequalities on random samples.

import numpy as np

from hadamard_means import SPDSpace, run_axiom_suite, spd_distance, spd_geodesic

S = SPDSpace(3)
rng = np.random.default_rng(0)

# Commuting matrices reduce to scalars: the distance between I and e^2 I is
# the norm of (2, 2, 2).

print("d(I, e^2 I) =", spd_distance(np.eye(3), np.e ** 2 * np.eye(3)), "vs", 2 * np.sqrt(3))

# The geodesic midpoint of two diagonal matrices is their elementwise
# geometric mean.

print(spd_geodesic(np.diag([1.0, 9.0]), np.diag([4.0, 1.0]), 0.5))

# Distances are invariant under congruence A -> X A X^T.

a, b = S.random_point(rng), S.random_point(rng)
x = rng.standard_normal((3, 3))
print("d(A, B)         =", spd_distance(a, b))
print("d(XAX^T, XBX^T) =", spd_distance(x @ a @ x.T, x @ b @ x.T))

# Points along the geodesic split the distance proportionally.

for t in (0.25, 0.5, 0.75):
    p = S.geodesic(a, b, t)
    print(f"t={t}: d(A, A#tB) / d(A, B) = {S.distance(a, p) / S.distance(a, b):.12f}")

# Every comparison inequality holds on random samples. The slack is rhs - lhs.

for name, slacks in run_axiom_suite(S, rng, samples=300).items():
    worst = min(s.slack for s in slacks)
    print(f"{name:22s} violations={sum(not s.holds for s in slacks)}  min slack={worst:.3e}")
