import numpy as np
import pytest

from hadamard_means import GOLDEN, EuclideanSpace, KroneckerSystem, SPDSpace
from hadamard_means import functions as fns
from hadamard_means.ergodic import estimate_pushforward_barycenter, mean_distance

T1 = KroneckerSystem.torus(GOLDEN)
S3 = SPDSpace(3)


@pytest.mark.parametrize("A", [fns.sine(2.0), fns.coordinate(), fns.exp_sine(),
                               fns.coset_cosine(4), fns.spd_step(3, 0.3, 0.7),
                               fns.constant(np.eye(2))])
def test_batch_agrees_with_pointwise(A, rng):
    gs = T1.haar_sample(rng, 20)
    assert np.allclose(A.many(gs), np.stack([A(g) for g in gs]), atol=0)


def test_spd_step_geometry():
    step = fns.SpdStep(3, split=0.3, jump=1.5, seed=2)
    assert S3.distance(step.low, step.high) == pytest.approx(1.5, rel=1e-12)
    res = estimate_pushforward_barycenter(T1, step.function(), 10_000, S3, tol=1e-12)
    assert S3.distance(res.point, step.barycenter) <= 1e-10
    assert step.discontinuities == (0.0, 0.3)


def test_unit_direction():
    h = fns.unit_direction(4, seed=1)
    assert np.allclose(h, h.T) and np.linalg.norm(h) == pytest.approx(1.0)
    assert np.count_nonzero(h - np.diag(np.diag(h))) > 0


def test_coset_cosine_invariant_under_quarter_shift(rng):
    A = fns.coset_cosine(4)
    gs = T1.haar_sample(rng, 50)
    assert np.allclose(A.many(gs), A.many((gs + 0.25) % 1), atol=1e-12)


def test_perturb_changes_small_set():
    A = fns.spd_step(3, 0.5, 1.0)
    B = fns.perturb(A, 0.7, 0.004, 0.5)
    assert mean_distance(A, B, T1, S3, 10_000) == pytest.approx(0.004, rel=1e-6)
    assert np.array_equal(A(0.2), B(0.2))


def test_cyclic_atoms():
    atoms = np.arange(6.0).reshape(3, 2)
    A = fns.cyclic_atoms(atoms)
    assert np.array_equal(A(2), atoms[2])
    assert np.array_equal(A.many([0, 2]), atoms[[0, 2]])


def test_random_atoms_condition(rng):
    atoms = fns.random_atoms(S3, 5, rng, max_cond=50)
    assert atoms.shape == (5, 3, 3)
    assert max(np.linalg.cond(a) for a in atoms) <= 50 * (1 + 1e-9)


def test_build_and_compatibility():
    assert fns.build("sin", EuclideanSpace(1)).name == "sine"
    assert fns.build("spd_step", SPDSpace(2), {"jump": 2.0}).name == "spd_step"
    A = fns.build("exp_sine", SPDSpace(2))
    assert A(0.25).shape == (2, 2)
    with pytest.raises(ValueError):
        fns.build("exp_sine", EuclideanSpace(1))
    with pytest.raises(ValueError):
        fns.build("sine", SPDSpace(3))
    with pytest.raises(ValueError):
        fns.build("nope", SPDSpace(3))
    with pytest.raises(ValueError):
        fns.build("exp_sine", S3, {"diag": [1.0, 2.0]})
