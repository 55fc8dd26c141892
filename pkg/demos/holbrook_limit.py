# # Inductive means of a periodic sequence
#
# Repeat three SPD matrices forever and take inductive means
# S_n = S_{n-1} #_{1/n} a_n. The means converge to the Karcher mean of the
# three matrices even though each step only uses a geodesic.

import numpy as np

from hadamard_means import (
    KroneckerSystem,
    SPDSpace,
    ergodic_inductive_run,
    inductive_mean,
    karcher_mean,
)
from hadamard_means.functions import cyclic_atoms, random_atoms

S = SPDSpace(3)
rng = np.random.default_rng(7)
atoms = random_atoms(S, 3, rng, max_cond=100)

bary = karcher_mean(atoms, S, tol=1e-12)
print("karcher mean converged in", bary.iterations, "iterations")

# The shift k -> k + 1 on Z/3Z visits the atoms in turn.

trace = ergodic_inductive_run(KroneckerSystem.cyclic(3), cyclic_atoms(atoms), 0, 10_000, S,
                              reference=bary.point)
print(trace.to_csv())

# Convergence is in distance only. The inductive mean of a finite list
# depends on its order, while the Karcher mean does not.

fwd = inductive_mean(list(atoms), S)
rev = inductive_mean(list(atoms[::-1]), S)
print("d(forward, reversed) =", S.distance(fwd, rev))
