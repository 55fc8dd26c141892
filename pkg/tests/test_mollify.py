
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hadamard_means import (
    GOLDEN,
    ConvergenceError,
    EmpiricalMeasure,
    EuclideanSpace,
    KroneckerSystem,
    MollifierConfig,
    OrbitFunction,
    SPDSpace,
    check_barycenter_contraction,
    check_mollifier_stability,
    continuity_modulus,
    l1_distance,
    mollified_function,
    mollify,
    truncate,
)
from hadamard_means import functions as fns
from hadamard_means.mollify import max_grid_deviation, neighbourhood
from hadamard_means.spaces import random_spd

T1 = KroneckerSystem.torus(GOLDEN)
E1 = EuclideanSpace(1)
S3 = SPDSpace(3)


def euclid_fn(f, regularity="stepwise"):
    def batch(gs):
        return f(np.asarray(gs, float)[..., 0])[..., None]

    return OrbitFunction(lambda g: batch(np.atleast_2d(g))[0], regularity, batch)


# configuration and neighbourhoods --------------------------------------

@pytest.mark.parametrize("kwargs", [{"eta": 0.0}, {"eta": -1.0}, {"eta": 0.1, "samples_per_eval": 0}])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        MollifierConfig(**kwargs)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("eta", [0.5, 0.1, 0.01])
def test_neighbourhood_size(d, eta):
    sysm = KroneckerSystem.torus([GOLDEN] * d, ergodic=True)
    offsets, measure = neighbourhood(sysm, MollifierConfig(eta, 64))
    assert measure <= eta * (1 + 1e-12)
    diam = max(sysm.metric(a, b) for a in offsets[::7] for b in offsets[::5])
    assert diam < eta


def test_cyclic_large_eta_uses_whole_group():
    c = KroneckerSystem.cyclic(5)
    with pytest.warns(UserWarning):
        ks, m = neighbourhood(c, MollifierConfig(1.0))
    assert sorted(ks.tolist()) == [0, 1, 2, 3, 4] and m == 1.0


# mollify ----------------------------------------------------------------

def test_mollify_constant(rng):
    p = random_spd(3, rng)
    for eta in (0.2, 0.01):
        out = mollify(fns.constant(p), MollifierConfig(eta), 0.37, T1, S3)
        assert S3.distance(out, p) <= 1e-10


def test_mollify_coordinate_window_average():
    out = mollify(fns.coordinate(), MollifierConfig(0.01), 0.5, T1, E1)
    assert abs(out[0] - 0.5) <= 1e-6


def test_mollify_step_far_from_jumps():
    A = fns.spd_step(3, 0.5, 1.0)
    for g0 in (0.2, 0.75):
        out = mollify(A, MollifierConfig(0.05), g0, T1, S3)
        assert S3.distance(out, A(g0)) <= 1e-8


def test_mollify_raises_on_nonconvergence():
    A = fns.spd_step(3, 0.5, 1.0)
    with pytest.raises(ConvergenceError) as info:
        mollify(A, MollifierConfig(0.1, max_iter=0), 0.5, T1, S3)
    assert not info.value.result.converged


def test_mollified_constant(rng):
    p = random_spd(3, rng)
    Ae = mollified_function(fns.constant(p), MollifierConfig(0.1), T1, S3)
    assert Ae.regularity == "continuous"
    for g in (0.0, 0.3, 0.999):
        assert S3.distance(Ae(g), p) <= 1e-10


def test_mollified_lipschitz_spot_check():
    # d(A_eta(g1), A_eta(g2)) <= average over U_eta of d(A(g1+u), A(g2+u))
    A = fns.exp_sine()
    cfg = MollifierConfig(0.1, 64, tol=1e-12)
    offsets, _ = neighbourhood(T1, cfg)
    rng = np.random.default_rng(8)
    for g1, g2 in rng.uniform(size=(10, 2)):
        lhs = S3.distance(mollify(A, cfg, g1, T1, S3), mollify(A, cfg, g2, T1, S3))
        rhs = np.mean(S3.distance(A.many(T1.add(g1, offsets)), A.many(T1.add(g2, offsets))))
        assert lhs <= rhs + 1e-9


def test_mollified_step_matches_far_from_jumps():
    A = fns.spd_step(3, 0.5, 1.0)
    Ae = mollified_function(A, MollifierConfig(0.05), T1, S3)
    grid = np.array([g for g in np.linspace(0, 1, 101)[:-1] if min(abs(g - 0.5), g, 1 - g) > 0.05])
    assert max(S3.distance(Ae(g), A(g)) for g in grid) <= 1e-8


def test_mollification_converges_for_lipschitz_function():
    A = fns.exp_sine()
    devs = [max_grid_deviation(A, mollified_function(A, MollifierConfig(eta), T1, S3),
                               100, T1, S3)
            for eta in (0.2, 0.1, 0.05, 0.01)]
    assert all(a > b for a, b in zip(devs, devs[1:]))
    assert devs[-1] < 1e-3


@pytest.mark.parametrize("A", [fns.spd_step(3, 0.5, 1.0), fns.exp_sine()], ids=["step", "exp_sine"])
def test_l1_to_mollification_decreases_with_eta(A):
    l1 = [l1_distance(A, mollified_function(A, MollifierConfig(eta), T1, S3), 2000, T1, S3)
          for eta in (0.2, 0.1, 0.05, 0.01)]
    assert all(a > b for a, b in zip(l1, l1[1:]))


def test_l1_step_mollification_oracle():
    # two unit jumps, each smeared linearly over a window of width eta
    A = fns.spd_step(3, 0.5, 1.0)
    l1 = {eta: l1_distance(A, mollified_function(A, MollifierConfig(eta), T1, S3), 4000, T1, S3)
          for eta in (0.1, 0.01)}
    assert l1[0.1] == pytest.approx(0.05, rel=0.05)
    assert l1[0.01] == pytest.approx(0.005, rel=0.05)
    assert l1[0.01] < l1[0.1] and l1[0.01] <= 0.02


# modulus and l1 ---------------------------------------------------------

def test_continuity_modulus_identity():
    assert continuity_modulus(fns.coordinate(), 0.0, 1, 1000, T1, E1) == 0.0
    assert continuity_modulus(fns.coordinate(), 1.0, 2, 1000, T1, E1) == 0.0


def test_continuity_modulus_coordinate():
    # |g + h - g| = h off the wrap set [1-h, 1), 1-h on it
    A = fns.coordinate()
    assert continuity_modulus(A, 0.1, 1, 10_000, T1, E1) == pytest.approx(0.18, rel=1e-9)
    assert continuity_modulus(A, 0.1, 2, 10_000, T1, E1) == pytest.approx(0.09, rel=1e-9)


@pytest.mark.parametrize("h", [0.01, 0.02, 0.05])
def test_continuity_modulus_step(h):
    A = fns.spd_step(3, 0.5, 2.0)
    assert continuity_modulus(A, h, 1, 10_000, T1, S3) == pytest.approx(2 * h * 2.0, rel=1e-6)


def test_continuity_modulus_rejects_p():
    with pytest.raises(ValueError):
        continuity_modulus(fns.coordinate(), 0.1, 3, 100, T1, E1)


def test_l1_trivial_cases(rng):
    A = fns.exp_sine()
    assert l1_distance(A, A, 1000, T1, S3) <= 1e-14
    p, q = random_spd(3, rng), random_spd(3, rng)
    assert l1_distance(fns.constant(p), fns.constant(q), 100, T1, S3) == pytest.approx(
        S3.distance(p, q), rel=1e-12)


# barycenter contraction -------------------------------------------------

def test_barycenter_contraction_identical(rng):
    pts = np.stack([random_spd(3, rng) for _ in range(5)])
    s = check_barycenter_contraction(pts, pts, S3)
    assert s.lhs <= 1e-12 and s.rhs <= 1e-12


def test_barycenter_contraction_two_atom_euclidean(rng):
    E = EuclideanSpace(2)
    a, b = rng.standard_normal((2, 2)), rng.standard_normal((2, 2))
    s = check_barycenter_contraction(a, b, E)
    assert s.lhs == pytest.approx(np.linalg.norm(a.mean(0) - b.mean(0)))
    assert s.holds


@given(st.integers(0, 2 ** 32 - 1))
def test_barycenter_contraction_spd(seed):
    rng = np.random.default_rng(seed)
    w = rng.uniform(0.1, 1, 10)
    a = EmpiricalMeasure(np.stack([random_spd(3, rng) for _ in range(10)]), w)
    b = EmpiricalMeasure(np.stack([random_spd(3, rng) for _ in range(10)]), w)
    assert check_barycenter_contraction(a, b, S3, atol=1e-6, tol=1e-12).holds


def test_barycenter_contraction_requires_coupling(rng):
    a = np.stack([random_spd(3, rng) for _ in range(3)])
    with pytest.raises(ValueError):
        check_barycenter_contraction(a, a[:2], S3)
    with pytest.raises(ValueError):
        check_barycenter_contraction(EmpiricalMeasure(a, [1, 2, 3]), EmpiricalMeasure(a), S3)


# truncation -------------------------------------------------------------

def test_truncate_bounded_is_identity():
    A = fns.sine()
    At = truncate(A, np.zeros(1), 5.0, E1)
    gs = T1.grid(200)
    assert np.array_equal(At.many(gs), A.many(gs))
    assert At.regularity == "l1"


def test_truncate_far_excursion():
    A = euclid_fn(lambda g: np.where((g >= 0.5) & (g < 0.55), 10.0, 0.0))
    At = truncate(A, np.zeros(1), 5.0, E1)
    assert l1_distance(A, At, 10_000, T1, E1) == pytest.approx(0.05 * 10, rel=1e-9)
    assert At(0.52)[0] == 0.0 and At(0.6)[0] == 0.0


def test_truncate_heavy_tail_vanishes():
    # A(g) = g^(-1/2): the part above N has integral 2/N
    A = euclid_fn(lambda g: 1.0 / np.sqrt(g), "l1")
    l1 = [l1_distance(A, truncate(A, np.zeros(1), N, E1), 10_000, T1, E1)
          for N in (2, 4, 8, 16)]
    assert all(a > b for a, b in zip(l1, l1[1:]))
    for N, v in zip((2, 4, 8), l1):
        assert v == pytest.approx(2 / N, rel=0.05)


def test_truncate_rejects_radius():
    with pytest.raises(ValueError):
        truncate(fns.sine(), np.zeros(1), 0.0, E1)


# stability --------------------------------------------------------------

def test_mollifier_stability_holds():
    A = fns.spd_step(3, 0.5, 1.0)
    B = fns.perturb(A, 0.7, 0.004, 0.5)
    s = check_mollifier_stability(A, B, MollifierConfig(0.1, 200), T1, S3, 0.05,
                                  quadrature_n=10_000, grid_n=200)
    assert s.holds and s.lhs > 0


def test_mollifier_stability_precondition():
    A = fns.spd_step(3, 0.5, 1.0)
    B = fns.perturb(A, 0.7, 0.1, 0.5)
    with pytest.raises(ValueError):
        check_mollifier_stability(A, B, MollifierConfig(0.1), T1, S3, 0.05)


def test_max_grid_deviation():
    A = fns.spd_step(3, 0.5, 1.0)
    assert max_grid_deviation(A, A, 50, T1, S3) <= 1e-14
    B = fns.perturb(A, 0.0, 0.1, 0.5)
    assert max_grid_deviation(A, B, 100, T1, S3) == pytest.approx(1.0, rel=1e-9)
