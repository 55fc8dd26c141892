# # Barycenters along an irrational rotation
#
# Rotate the circle by the golden ratio and feed the values of an SPD-valued
# function along the orbit into the inductive mean. For a continuous function
# every starting point works. A step function works for almost every start.

import warnings

import numpy as np

from hadamard_means import (
    GOLDEN,
    KroneckerSystem,
    SPDSpace,
    estimate_pushforward_barycenter,
    multi_start_run,
)
from hadamard_means import functions as fns

S = SPDSpace(3)
rot = KroneckerSystem.torus(GOLDEN)
rng = np.random.default_rng(1)
starts = rot.haar_sample(rng, 5)

A = fns.exp_sine()
ref = estimate_pushforward_barycenter(rot, A, 10_000, S).point
for tr in multi_start_run(rot, A, starts, 20_000, S, reference=ref):
    print(f"exp_sine  start={tr.start[0]:.3f}  delta(S_n, b(A)) = {tr.final_delta:.2e}")

step = fns.SpdStep(3, split=0.3, jump=1.0)
for tr in multi_start_run(rot, step.function(), starts, 20_000, S, reference=step.barycenter):
    print(f"spd_step  start={tr.start[0]:.3f}  delta(S_n, b(A)) = {tr.final_delta:.2e}")

# A rational rotation is not ergodic. With a function that is constant on
# the cosets of the quarter rotation, the orbit of 0 never sees the other
# values and the means stay put.

quarter = KroneckerSystem.torus(0.25)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    tr = multi_start_run(quarter, fns.coset_cosine(4), [[0.0]], 20_000, S,
                         reference=np.eye(3))[0]
print("rational rotation: delta to b(A) =", tr.final_delta)
