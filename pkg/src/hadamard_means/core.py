"""Hadamard-space interface and the CAT(0) comparison-inequality checkers.

Every checker evaluates both sides of one inequality and returns an
:class:`InequalitySlack`. Checkers are pure; sampling belongs to callers.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

DEFAULT_ATOL = 1e-8
DEFAULT_RTOL = 1e-8


class DomainError(ValueError):
    """A point does not belong to the space it is used with."""


class NumericError(ArithmeticError):
    """A numerical routine (eigendecomposition, solver) failed."""


def slack_tolerance(rhs, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
    """Tolerance ``max(atol, rtol * |rhs|)`` used by all checkers."""
    return max(atol, rtol * abs(rhs))


@dataclass(frozen=True)
class InequalitySlack:
    """Both sides of an inequality ``lhs <= rhs``.

    ``slack`` is ``rhs - lhs``; the inequality is considered to hold when
    ``slack >= -tol``.
    """

    lhs: float
    rhs: float
    tol: float = field(default=DEFAULT_ATOL)

    @property
    def slack(self):
        return self.rhs - self.lhs

    @property
    def holds(self):
        return self.slack >= -self.tol

    @classmethod
    def of(cls, lhs, rhs, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
        lhs, rhs = float(lhs), float(rhs)
        return cls(lhs, rhs, slack_tolerance(rhs, atol, rtol))

    def to_dict(self):
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "tol": self.tol,
            "holds": self.holds,
        }


class HadamardSpace(ABC):
    """A concrete geodesic metric space of non-positive curvature.

    Subclasses provide a metric ``distance`` and the constant-speed
    ``geodesic`` between two points. Points are plain numpy arrays; the
    point functions broadcast over leading axes so several independent
    points can be processed at once.

    Spaces that support barycenter computation also implement
    ``log_map``/``exp_map`` and ``tangent_norm`` in whatever coordinates
    are convenient for that space.
    """

    #: short name used in configs, e.g. ``"spd"``
    kind = "abstract"
    #: default stopping tolerance of the barycenter solver
    default_tol = 1e-8

    def __init__(self, dim):
        self.dim = int(dim)
        if self.dim < 1:
            raise ValueError(f"dimension must be positive, got {dim}")

    def __repr__(self):
        return f"{type(self).__name__}({self.dim})"

    def __eq__(self, other):
        return type(self) is type(other) and self.dim == other.dim

    def __hash__(self):
        return hash((type(self).__name__, self.dim))

    @property
    def spec(self):
        """Config string describing this space, e.g. ``"spd:3"``."""
        return f"{self.kind}:{self.dim}"

    @property
    def point_shape(self):
        raise NotImplementedError

    @abstractmethod
    def validate(self, x):
        """Return ``x`` as a clean float array, or raise :class:`DomainError`."""

    @abstractmethod
    def distance(self, x, y):
        """Geodesic distance between ``x`` and ``y``."""

    @abstractmethod
    def geodesic(self, x, y, t):
        """Point at parameter ``t`` in [0, 1] on the geodesic from ``x`` to ``y``."""

    def geodesic_with_distance(self, x, y, t):
        """Return ``(geodesic(x, y, t), distance(x, y))``.

        Spaces override this when both quantities share work.
        """
        return self.geodesic(x, y, t), self.distance(x, y)

    def midpoint(self, x, y):
        return self.geodesic(x, y, 0.5)

    def random_point(self, rng, scale=1.0):
        raise NotImplementedError

    def log_map(self, base, x):
        raise NotImplementedError(f"{type(self).__name__} has no log map")

    def exp_map(self, base, v):
        raise NotImplementedError(f"{type(self).__name__} has no exp map")

    def tangent_norm(self, base, v):
        raise NotImplementedError(f"{type(self).__name__} has no tangent norm")

    def tangent_norms(self, base, vs):
        return np.array([self.tangent_norm(base, v) for v in vs])

    def to_json(self, x):
        return np.asarray(x, dtype=float).tolist()

    def from_json(self, obj):
        return self.validate(np.asarray(obj, dtype=float))


def check_t(t):
    t = float(t)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"geodesic parameter t must lie in [0, 1], got {t}")
    return t


def check_semiparallelogram(space, x, y, z, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
    """Semiparallelogram law at the midpoint ``m`` of ``x`` and ``y``.

    ``d(m, z)^2 <= d(x, z)^2 / 2 + d(y, z)^2 / 2 - d(x, y)^2 / 4``
    """
    x, y, z = space.validate(x), space.validate(y), space.validate(z)
    m = space.geodesic(x, y, 0.5)
    lhs = space.distance(m, z) ** 2
    rhs = (0.5 * space.distance(x, z) ** 2 + 0.5 * space.distance(y, z) ** 2
           - 0.25 * space.distance(x, y) ** 2)
    return InequalitySlack.of(lhs, rhs, atol, rtol)


def check_geodesic_convexity(space, x, y, z, t, atol=DEFAULT_ATOL,
                             rtol=DEFAULT_RTOL):
    """``d(x #_t y, z)^2 <= (1-t) d(x,z)^2 + t d(y,z)^2 - t(1-t) d(x,y)^2``."""
    t = check_t(t)
    x, y, z = space.validate(x), space.validate(y), space.validate(z)
    p = space.geodesic(x, y, t)
    lhs = space.distance(p, z) ** 2
    rhs = ((1 - t) * space.distance(x, z) ** 2 + t * space.distance(y, z) ** 2
           - t * (1 - t) * space.distance(x, y) ** 2)
    return InequalitySlack.of(lhs, rhs, atol, rtol)


def check_convexity_of_distance(space, a, a2, b, b2, t, atol=DEFAULT_ATOL,
                                rtol=DEFAULT_RTOL):
    """``d(a #_t a2, b #_t b2) <= (1-t) d(a, b) + t d(a2, b2)``."""
    t = check_t(t)
    a, a2 = space.validate(a), space.validate(a2)
    b, b2 = space.validate(b), space.validate(b2)
    lhs = space.distance(space.geodesic(a, a2, t), space.geodesic(b, b2, t))
    rhs = (1 - t) * space.distance(a, b) + t * space.distance(a2, b2)
    return InequalitySlack.of(lhs, rhs, atol, rtol)


def check_reshetnyak(space, x1, x2, x3, x4, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
    """Reshetnyak quadruple comparison.

    ``d(x1,x3)^2 + d(x2,x4)^2 <= d(x2,x3)^2 + d(x1,x4)^2 + 2 d(x1,x2) d(x3,x4)``
    """
    x1, x2, x3, x4 = (space.validate(p) for p in (x1, x2, x3, x4))
    d = space.distance
    lhs = d(x1, x3) ** 2 + d(x2, x4) ** 2
    rhs = d(x2, x3) ** 2 + d(x1, x4) ** 2 + 2 * d(x1, x2) * d(x3, x4)
    return InequalitySlack.of(lhs, rhs, atol, rtol)


AXIOM_CHECKERS = {
    "semiparallelogram": check_semiparallelogram,
    "geodesic_convexity": check_geodesic_convexity,
    "convexity_of_distance": check_convexity_of_distance,
    "reshetnyak": check_reshetnyak,
}


def run_axiom_suite(space, rng, samples=1000, atol=DEFAULT_ATOL,
                    rtol=DEFAULT_RTOL, scale=1.0):
    """Evaluate every axiom checker on ``samples`` random configurations.

    Returns a dict mapping checker name to the list of slacks.
    """
    out = {name: [] for name in AXIOM_CHECKERS}
    for _ in range(samples):
        p = [space.random_point(rng, scale) for _ in range(4)]
        t = rng.uniform()
        out["semiparallelogram"].append(
            check_semiparallelogram(space, p[0], p[1], p[2], atol, rtol))
        out["geodesic_convexity"].append(
            check_geodesic_convexity(space, p[0], p[1], p[2], t, atol, rtol))
        out["convexity_of_distance"].append(
            check_convexity_of_distance(space, p[0], p[1], p[2], p[3], t,
                                        atol, rtol))
        out["reshetnyak"].append(check_reshetnyak(space, *p, atol, rtol))
    return out
