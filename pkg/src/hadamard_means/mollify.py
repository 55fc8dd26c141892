"""Barycentric mollification of orbit functions.

``A_eta(g0)`` is the barycenter of the values of ``A`` on the translate
``g0 + U_eta`` of a small identity neighbourhood. Only distances and
barycenters are used, so the construction works in any Hadamard space.
"""

import functools
import warnings
from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_ATOL, DEFAULT_RTOL, InequalitySlack
from .ergodic import OrbitFunction, mean_distance
from .means import EmpiricalMeasure, karcher_mean


class ConvergenceError(RuntimeError):
    """The barycenter solver stopped before reaching its tolerance.

    The unconverged :class:`~hadamard_means.means.BarycenterResult` is
    available as ``result``.
    """

    def __init__(self, message, result):
        super().__init__(message)
        self.result = result


@dataclass(frozen=True)
class MollifierConfig:
    eta: float
    samples_per_eval: int = 64
    sampler_seed: int = 0
    tol: float = None
    max_iter: int = 500

    def __post_init__(self):
        if not self.eta > 0:
            raise ValueError(f"eta must be positive, got {self.eta}")
        if self.samples_per_eval < 1:
            raise ValueError("samples_per_eval must be at least 1")


def neighbourhood(system, config):
    """Grid offsets for ``U_eta`` and its Haar measure.

    On ``torus(d)`` the neighbourhood is the ball of radius
    ``min(eta, eta^(1/d)) / 2``, so its diameter and measure are both at
    most ``eta``. On cyclic groups ``eta >= 1`` means the whole group.
    """
    eta = config.eta
    if system.kind == "cyclic":
        if eta >= 1:
            warnings.warn("eta >= 1 on a cyclic group: averaging over the whole group",
                          stacklevel=3)
            return np.arange(system.d), 1.0
        return system.ball(eta / 2, config.samples_per_eval)
    radius = min(eta, eta ** (1.0 / system.d)) / 2
    return system.ball(radius, config.samples_per_eval)


def mollify(A, config, g0, system, space):
    """``A_eta(g0)``: barycenter of ``A`` over ``g0 + U_eta``.

    The Haar measure on ``U_eta`` is replaced by a fixed midpoint grid of
    ``config.samples_per_eval`` nodes, so the result is deterministic.

    Raises
    ------
    ConvergenceError
        If the barycenter solver does not converge.
    """
    offsets, _ = neighbourhood(system, config)
    atoms = A.many(system.add(system.element(g0), offsets))
    res = karcher_mean(EmpiricalMeasure(atoms), space, tol=config.tol,
                       max_iter=config.max_iter)
    if not res.converged:
        raise ConvergenceError(f"mollifier barycenter at g0={g0} did not converge", res)
    return res.point


def mollified_function(A, config, system, space, cache_size=65536):
    """``A_eta`` as an :class:`OrbitFunction` (always continuous)."""
    def key(g):
        return tuple(np.atleast_1d(system.element(g)).tolist())

    @functools.lru_cache(maxsize=cache_size)
    def cached(k):
        g = np.array(k) if system.kind == "torus" else k[0]
        return mollify(A, config, g, system, space)

    def fn(g):
        return cached(key(g)).copy()

    def batch(gs):
        return np.stack([fn(g) for g in gs])

    return OrbitFunction(fn, "continuous", batch, f"{A.name}_eta{config.eta:g}")


def continuity_modulus(A, h, p, quadrature_n, system, space):
    """``phi(h) = int_G d(A(g), A(g + h))^p dm(g)`` by quadrature."""
    if p not in (1, 2):
        raise ValueError("p must be 1 or 2")
    if system.is_identity(h):
        return 0.0
    return mean_distance(A, A, system, space, quadrature_n, p=p,
                         shift=system.element(h))


def l1_distance(A, B, quadrature_n, system, space):
    """``int_G d(A(g), B(g)) dm(g)`` by quadrature."""
    return mean_distance(A, B, system, space, quadrature_n)


def check_barycenter_contraction(measure_a, measure_b, space, atol=DEFAULT_ATOL,
                                 rtol=DEFAULT_RTOL, tol=None):
    """``d(b(mu_A), b(mu_B)) <= sum_i w_i d(a_i, b_i)`` for an atomwise coupling."""
    if not isinstance(measure_a, EmpiricalMeasure):
        measure_a = EmpiricalMeasure(measure_a)
    if not isinstance(measure_b, EmpiricalMeasure):
        measure_b = EmpiricalMeasure(measure_b)
    if len(measure_a) != len(measure_b):
        raise ValueError(f"coupled measures need equal atom counts "
                         f"({len(measure_a)} != {len(measure_b)})")
    if not np.allclose(measure_a.weights, measure_b.weights, rtol=0, atol=1e-12):
        raise ValueError("coupled measures need identical weights")
    ba = karcher_mean(measure_a, space, tol=tol).point
    bb = karcher_mean(measure_b, space, tol=tol).point
    lhs = space.distance(ba, bb)
    d = np.asarray(space.distance(measure_a.points, measure_b.points))
    rhs = float(np.dot(measure_a.weights, d))
    return InequalitySlack.of(lhs, rhs, atol, rtol)


def truncate(A, z0, radius, space):
    """``A(g)`` where ``d(A(g), z0) < radius``, otherwise ``z0``."""
    if not radius > 0:
        raise ValueError("truncation radius must be positive")
    z0 = space.validate(z0)

    def batch(gs):
        vals = A.many(gs)
        far = np.atleast_1d(space.distance(vals, z0)) >= radius
        vals[far] = z0
        return vals

    def fn(g):
        v = A(g)
        return v if space.distance(v, z0) < radius else z0.copy()

    return OrbitFunction(fn, "l1", batch, f"{A.name}_trunc{radius:g}")


def max_grid_deviation(A, B, grid_n, system, space):
    """``max_g d(A(g), B(g))`` over a ``grid_n``-point grid."""
    grid = system.grid(grid_n)
    return float(np.max(space.distance(A.many(grid), B.many(grid))))


def check_mollifier_stability(A, B, config, system, space, eps, quadrature_n=10_000,
                              grid_n=200, atol=1e-6):
    """Uniform closeness of mollifications of L1-close functions.

    Requires ``l1_distance(A, B) <= m(U_eta) * eps`` and checks
    ``max_g d(A_eta(g), B_eta(g)) <= eps`` over a ``grid_n``-point grid.

    Raises
    ------
    ValueError
        If the L1 precondition fails.
    """
    _, measure = neighbourhood(system, config)
    rho = l1_distance(A, B, quadrature_n, system, space)
    if rho > measure * eps:
        raise ValueError(f"l1 distance {rho:.4g} exceeds m(U_eta) * eps = {measure * eps:.4g}")
    grid = system.grid(grid_n)
    worst = max(float(space.distance(mollify(A, config, g, system, space),
                                     mollify(B, config, g, system, space)))
                for g in grid)
    return InequalitySlack.of(worst, eps, atol, 0.0)
