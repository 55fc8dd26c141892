import math
from fractions import Fraction

import numpy as np
import pytest

from hadamard_means import (
    GOLDEN,
    EuclideanSpace,
    KroneckerSystem,
    NonErgodicWarning,
    OrbitFunction,
    SPDSpace,
    birkhoff_average,
    check_orbit_contraction,
    ergodic_inductive_run,
    estimate_pushforward_barycenter,
    karcher_mean,
    multi_start_run,
    orbit,
)
from hadamard_means import functions as fns
from hadamard_means.ergodic import TRACE_COLUMNS, _Walker, checkpoint_schedule
from hadamard_means.spaces import random_spd, sym_exp

E1 = EuclideanSpace(1)
S3 = SPDSpace(3)
GOLDEN_SYSTEM = KroneckerSystem.torus(GOLDEN)


def circle_gap(a, b):
    d = abs(a - b) % 1.0
    return min(d, 1.0 - d)


# systems ----------------------------------------------------------------

def test_golden_constant():
    assert GOLDEN == (math.sqrt(5) - 1) / 2
    assert GOLDEN_SYSTEM.ergodic


def test_rational_torus_flagged_non_ergodic():
    assert not KroneckerSystem.torus(0.25).ergodic
    assert not KroneckerSystem.torus([GOLDEN, 0.5]).ergodic
    assert KroneckerSystem.torus(0.25, ergodic=True).ergodic


@pytest.mark.parametrize("d,g,ergodic", [(3, 1, True), (6, 4, False), (7, 3, True), (4, 0, False)])
def test_cyclic_ergodic_flag(d, g, ergodic):
    assert KroneckerSystem.cyclic(d, g).ergodic is ergodic


def test_cyclic_rejects_empty_group():
    with pytest.raises(ValueError):
        KroneckerSystem.cyclic(0)


def test_torus_metric_shift_invariant_exact():
    # dyadic rationals are exact in binary floating point
    sysm = KroneckerSystem.torus([0.5, 0.25])
    rng = np.random.default_rng(0)
    for _ in range(500):
        x, y, h = (rng.integers(0, 64, 2) / 64 for _ in range(3))
        fx, fy, fh = ([Fraction(int(v * 64), 64) for v in p] for p in (x, y, h))
        exact = max(min(abs(a - b) % 1, 1 - abs(a - b) % 1) for a, b in zip(fx, fy))
        assert sysm.metric(x, y) == float(exact)
        assert sysm.metric(sysm.add(x, h), sysm.add(y, h)) == float(exact)


def test_torus_metric_shift_invariant_float():
    t2 = KroneckerSystem.torus([GOLDEN, 0.1])
    rng = np.random.default_rng(1)
    for _ in range(1000):
        x, y, h = rng.uniform(size=(3, 2))
        assert abs(t2.metric(x, y) - t2.metric(t2.add(x, h), t2.add(y, h))) <= 1e-15


def test_cyclic_metric():
    c = KroneckerSystem.cyclic(5)
    assert c.metric(0, 4) == pytest.approx(0.2)
    assert c.metric(1, 3) == pytest.approx(0.4)


def test_grid_and_haar_shapes(rng):
    t2 = KroneckerSystem.torus([GOLDEN, 0.1])
    assert t2.grid(100).shape == (100, 2)
    assert t2.haar_sample(rng, 7).shape == (7, 2)
    assert list(KroneckerSystem.cyclic(4).grid(10)) == [0, 1, 2, 3]


def test_ball_measure():
    offsets, m = GOLDEN_SYSTEM.ball(0.05, 10)
    assert m == pytest.approx(0.1) and len(offsets) == 10
    assert np.max(np.abs(offsets)) < 0.05
    ks, mc = KroneckerSystem.cyclic(10).ball(0.1, 0)
    assert sorted(ks.tolist()) == [0, 1, 9] and mc == pytest.approx(0.3)


# orbits -----------------------------------------------------------------

def test_orbit_cyclic():
    assert orbit(KroneckerSystem.cyclic(3), 0, 4).tolist() == [0, 1, 2, 0]


def test_orbit_quarter_rotation():
    assert orbit(KroneckerSystem.torus(0.25), 0.0, 4)[:, 0].tolist() == [0, 0.25, 0.5, 0.75]


def test_golden_orbit_equidistributes():
    pts = orbit(GOLDEN_SYSTEM, 0.0, 10_000)[:, 0]
    counts = np.bincount((pts * 10).astype(int), minlength=10)
    assert np.max(np.abs(counts - 1000)) <= 30


def test_kahan_orbit_drift_against_exact_arithmetic():
    alpha = Fraction(GOLDEN)
    starts = np.array([[0.0], [0.123456789], [0.987654321]])
    walker = _Walker(GOLDEN_SYSTEM, starts)
    checkpoints = {10_000, 100_000, 1_000_000}
    for n in range(1, 1_000_001):
        walker.advance()
        if n in checkpoints:
            for s, x in zip(starts[:, 0], walker.x[:, 0]):
                exact = float((Fraction(s) + n * alpha) % 1)
                assert circle_gap(x, exact) < 1e-10
            assert np.all((walker.x >= 0) & (walker.x < 1))


def test_birkhoff_constant_and_cyclic():
    assert birkhoff_average(GOLDEN_SYSTEM, lambda g: 2.5, 0.3, 100) == 2.5
    c = KroneckerSystem.cyclic(4)
    vals = [3.0, -1.0, 0.5, 7.0]
    assert birkhoff_average(c, lambda k: vals[k], 2, 8) == pytest.approx(np.mean(vals))


def test_birkhoff_indicator():
    avg = birkhoff_average(GOLDEN_SYSTEM, lambda g: float(g[0] < 0.3), 0.0, 100_000)
    assert avg == pytest.approx(0.3, abs=0.01)


# pushforward barycenters -----------------------------------------------

def test_pushforward_cyclic_is_exact(rng):
    atoms = np.stack([random_spd(3, rng) for _ in range(4)])
    c = KroneckerSystem.cyclic(4)
    res = estimate_pushforward_barycenter(c, fns.cyclic_atoms(atoms), 1, S3, tol=1e-12)
    assert S3.distance(res.point, karcher_mean(atoms, S3, tol=1e-12).point) <= 1e-10


def test_pushforward_of_coordinate_is_half():
    res = estimate_pushforward_barycenter(GOLDEN_SYSTEM, fns.coordinate(), 10_000, E1)
    assert abs(res.point[0] - 0.5) <= 1e-3


def test_pushforward_exp_sine_is_log_mean():
    D = np.array([1.0, 0.5, -0.5])
    res = estimate_pushforward_barycenter(GOLDEN_SYSTEM, fns.exp_sine(D), 1000, S3, tol=1e-12)
    c = np.mean(np.sin(2 * np.pi * (np.arange(1000) + 0.5) / 1000))
    assert S3.distance(res.point, np.diag(np.exp(c * D))) <= 1e-10
    assert S3.distance(res.point, np.eye(3)) <= 1e-10


# runs -------------------------------------------------------------------

def test_constant_function_run(rng):
    p = random_spd(3, rng)
    tr = ergodic_inductive_run(GOLDEN_SYSTEM, fns.constant(p), 0.4, 500, S3, reference=p)
    assert np.max(tr.deltas) <= 1e-12
    assert tr.diameter_bound <= 1e-12


def test_sine_run_converges_to_zero():
    tr = ergodic_inductive_run(GOLDEN_SYSTEM, fns.sine(), 0.0, 100_000, E1,
                               reference=np.zeros(1))
    assert tr.final_delta <= 0.01
    assert tr.ns[-1] == 100_000


def test_holbrook_cyclic_run(rng):
    atoms = np.stack([random_spd(3, rng, max_cond=100) for _ in range(3)])
    bary = karcher_mean(atoms, S3, tol=1e-12).point
    tr = ergodic_inductive_run(KroneckerSystem.cyclic(3), fns.cyclic_atoms(atoms), 0, 10_000,
                               S3, reference=bary, checkpoints=[100])
    spread = max(S3.distance(a, b) for a in atoms for b in atoms)
    assert tr.final_delta <= 0.05 * spread
    assert tr.final_delta < tr.delta_at(100)


def test_cyclic_visit_bookkeeping(rng):
    atoms = np.stack([random_spd(2, rng) for _ in range(5)])
    tr = ergodic_inductive_run(KroneckerSystem.cyclic(5, 2), fns.cyclic_atoms(atoms), 3, 35,
                               SPDSpace(2))
    assert tr.metadata["visits"] == [7] * 5


def test_multi_start_matches_single_runs():
    A = fns.exp_sine()
    starts = np.array([[0.1], [0.55], [0.9]])
    batch = multi_start_run(GOLDEN_SYSTEM, A, starts, 2000, S3, reference=np.eye(3))
    for s, tr in zip(starts, batch):
        single = ergodic_inductive_run(GOLDEN_SYSTEM, A, s, 2000, S3, reference=np.eye(3))
        assert np.allclose(tr.deltas, single.deltas, rtol=1e-12, atol=1e-15)


def test_rational_rotation_warns_and_stalls():
    A = fns.coset_cosine(4)
    with pytest.warns(NonErgodicWarning):
        tr = ergodic_inductive_run(KroneckerSystem.torus(0.25), A, 0.0, 1000, S3,
                                   reference=np.eye(3))
    assert tr.final_delta == pytest.approx(np.linalg.norm([1.0, 0.5, -0.5]), rel=1e-9)
    assert tr.metadata["warnings"]


def test_checkpoint_schedule():
    assert checkpoint_schedule(10) == [1, 2, 4, 8, 10]
    assert checkpoint_schedule(16, [3, 100]) == [1, 2, 3, 4, 8, 16]
    with pytest.raises(ValueError):
        checkpoint_schedule(0)


def test_trace_csv_columns():
    tr = ergodic_inductive_run(GOLDEN_SYSTEM, fns.sine(), 0.2, 64, E1, reference=np.zeros(1))
    lines = tr.to_csv().splitlines()
    assert lines[0] == ",".join(TRACE_COLUMNS)
    assert len(lines) == 1 + len(tr.ns)
    n, delta, _ = lines[-1].split(",")
    assert int(n) == 64 and float(delta) == tr.final_delta
    with pytest.raises(KeyError):
        tr.delta_at(3)


# orbit contraction ------------------------------------------------------

def test_orbit_contraction_identical():
    A = fns.exp_sine()
    s = check_orbit_contraction(GOLDEN_SYSTEM, A, A, 0.3, 200, S3, eps=0.0)
    assert s.lhs <= 1e-12 and s.holds


def test_orbit_contraction_spd_congruence():
    A = fns.exp_sine()
    X = sym_exp(0.1 * fns.unit_direction(3, seed=4))
    B = OrbitFunction(lambda g: X @ A(g) @ X.T, "continuous",
                      lambda gs: X @ A.many(gs) @ X.T, "congruent")
    s = check_orbit_contraction(GOLDEN_SYSTEM, A, B, 0.0, 10_000, S3, eps=0.05)
    assert s.holds and s.lhs > 0


def test_orbit_contraction_euclidean_bump():
    A = fns.sine()

    def bump(gs):
        g = np.asarray(gs, float)[..., 0]
        return A.many(gs) + ((g >= 0.2) & (g < 0.3))[..., None]

    B = OrbitFunction(lambda g: bump(np.atleast_2d(g))[0], "stepwise", bump, "bump")
    s = check_orbit_contraction(GOLDEN_SYSTEM, A, B, 0.0, 20_000, E1, eps=0.05)
    assert s.rhs == pytest.approx(0.15, abs=1e-3)
    assert s.lhs == pytest.approx(0.1, abs=0.01)
    assert s.holds
