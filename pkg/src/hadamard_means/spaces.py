"""Concrete Hadamard spaces.

* :class:`EuclideanSpace` -- R^d with straight segments.
* :class:`SPDSpace` -- real symmetric positive definite n x n matrices with
  the affine-invariant metric ``d(A, B) = ||log(A^-1/2 B A^-1/2)||_F``.
* :class:`HyperboloidSpace` -- the hyperboloid model of hyperbolic d-space.

All point functions broadcast over leading axes: an SPD "point" argument may
be an array of shape ``(..., n, n)``, a Euclidean one ``(..., d)``.
"""

import numpy as np

from .core import DomainError, HadamardSpace, NumericError, check_t

#: eigenvalues at or below this are rejected as non positive definite
SPD_EIG_FLOOR = 1e-300
#: allowed violation of the hyperboloid constraint, relative to x0^2
HYPERBOLOID_TOL = 1e-10


def _swap(a):
    return np.swapaxes(a, -1, -2)


def symmetrize(a):
    a = np.asarray(a, dtype=float)
    return (a + _swap(a)) / 2


def _eigh(a):
    try:
        w, v = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}") from exc
    if not np.all(np.isfinite(w)):
        raise NumericError("eigendecomposition produced non-finite values")
    return w, v


def _spd_eigh(a):
    w, v = _eigh(a)
    if np.any(w <= SPD_EIG_FLOOR):
        raise DomainError(
            f"matrix is not positive definite (min eigenvalue {w.min():.3g})")
    return w, v


def _apply(w, v, fw):
    # v diag(fw) v^T, batched
    return (v * fw[..., None, :]) @ _swap(v)


def spd_function(a, fn):
    """Apply a scalar function to the eigenvalues of SPD ``a``."""
    w, v = _spd_eigh(symmetrize(a))
    return symmetrize(_apply(w, v, fn(w)))


def spd_sqrt(a):
    return spd_function(a, np.sqrt)


def spd_invsqrt(a):
    return spd_function(a, lambda w: 1.0 / np.sqrt(w))


def spd_log(a):
    return spd_function(a, np.log)


def spd_power(a, t):
    return spd_function(a, lambda w: w ** t)


def sym_exp(h):
    """Matrix exponential of a symmetric matrix (result is SPD)."""
    w, v = _eigh(symmetrize(h))
    return symmetrize(_apply(w, v, np.exp(w)))


def _whiten(a, b):
    """Return ``a^1/2``, ``a^-1/2`` and ``a^-1/2 b a^-1/2``."""
    w, v = _spd_eigh(a)
    s = np.sqrt(w)
    a_half = _apply(w, v, s)
    a_ihalf = _apply(w, v, 1.0 / s)
    return a_half, a_ihalf, symmetrize(a_ihalf @ b @ a_ihalf)


def spd_distance(a, b):
    """Affine-invariant distance ``||log(a^-1/2 b a^-1/2)||_F``.

    Broadcasts over leading axes; returns a float for single matrices.
    """
    a, b = symmetrize(a), symmetrize(b)
    if a.ndim == 2 and b.ndim == 2 and np.array_equal(a, b):
        _spd_eigh(a)
        return 0.0
    _, _, m = _whiten(a, b)
    lam, _ = _spd_eigh(m)
    d = np.sqrt(np.sum(np.log(lam) ** 2, axis=-1))
    return float(d) if np.ndim(d) == 0 else d


def spd_geodesic(a, b, t):
    """``a #_t b = a^1/2 (a^-1/2 b a^-1/2)^t a^1/2`` for t in [0, 1]."""
    return _spd_geodesic(symmetrize(a), symmetrize(b), check_t(t))[0]


def _spd_geodesic(a, b, t):
    a_half, _, m = _whiten(a, b)
    lam, u = _spd_eigh(m)
    dist = np.sqrt(np.sum(np.log(lam) ** 2, axis=-1))
    if t == 0.0:
        out = np.broadcast_to(a, np.broadcast_shapes(a.shape, b.shape)).copy()
    elif t == 1.0:
        out = np.broadcast_to(b, np.broadcast_shapes(a.shape, b.shape)).copy()
    else:
        out = symmetrize(a_half @ _apply(lam, u, lam ** t) @ a_half)
    return out, (float(dist) if np.ndim(dist) == 0 else dist)


def random_spd(n, rng, max_cond=1e4, log_spread=1.5):
    """Random SPD matrix with condition number at most ``max_cond``.

    Eigenvalues are ``exp(u)`` with ``u`` uniform on ``[-h, h]``,
    ``h = min(log_spread, log(max_cond) / 2)``; eigenvectors are Haar
    orthogonal.
    """
    h = min(log_spread, np.log(max_cond) / 2)
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    q = q * np.sign(np.diag(r))
    w = np.exp(rng.uniform(-h, h, size=n))
    return symmetrize((q * w) @ q.T)


class SPDSpace(HadamardSpace):
    """Symmetric positive definite ``n x n`` matrices, affine-invariant metric.

    Tangent vectors used by :meth:`log_map` / :meth:`exp_map` are expressed
    in whitened coordinates at the base point: the symmetric matrix
    ``base^-1/2 xi base^-1/2``. In these coordinates the Riemannian norm is
    the Frobenius norm.
    """

    kind = "spd"

    @property
    def point_shape(self):
        return (self.dim, self.dim)

    def validate(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-2:] != self.point_shape:
            raise DomainError(f"expected shape (..., {self.dim}, {self.dim}), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DomainError("matrix has non-finite entries")
        x = symmetrize(x)
        _spd_eigh(x)
        return x

    def distance(self, x, y):
        return spd_distance(x, y)

    def geodesic(self, x, y, t):
        return spd_geodesic(x, y, t)

    def geodesic_with_distance(self, x, y, t):
        return _spd_geodesic(symmetrize(x), symmetrize(y), check_t(t))

    def random_point(self, rng, scale=1.0, max_cond=1e4):
        return random_spd(self.dim, rng, max_cond=max_cond, log_spread=1.5 * scale)

    def log_map(self, base, x):
        _, a_ihalf, m = _whiten(symmetrize(base), symmetrize(x))
        lam, u = _spd_eigh(m)
        return symmetrize(_apply(lam, u, np.log(lam)))

    def exp_map(self, base, v):
        a_half = spd_sqrt(base)
        return symmetrize(a_half @ sym_exp(v) @ a_half)

    def tangent_norm(self, base, v):
        return float(np.linalg.norm(v, ord="fro"))

    def tangent_norms(self, base, vs):
        return np.sqrt(np.sum(np.asarray(vs) ** 2, axis=(-2, -1)))


def euclid_distance(x, y):
    d = np.linalg.norm(np.asarray(x, float) - np.asarray(y, float), axis=-1)
    return float(d) if np.ndim(d) == 0 else d


def euclid_geodesic(x, y, t):
    t = check_t(t)
    return (1 - t) * np.asarray(x, float) + t * np.asarray(y, float)


class EuclideanSpace(HadamardSpace):
    """R^d with the Euclidean norm; geodesics are line segments."""

    kind = "euclid"
    default_tol = 1e-10

    @property
    def point_shape(self):
        return (self.dim,)

    def validate(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 0 and self.dim == 1:
            x = x.reshape(1)
        if x.shape[-1:] != self.point_shape:
            raise DomainError(f"expected shape (..., {self.dim}), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DomainError("point has non-finite coordinates")
        return x

    def distance(self, x, y):
        return euclid_distance(x, y)

    def geodesic(self, x, y, t):
        return euclid_geodesic(x, y, t)

    def random_point(self, rng, scale=1.0):
        return rng.standard_normal(self.dim) * scale

    def log_map(self, base, x):
        return np.asarray(x, float) - np.asarray(base, float)

    def exp_map(self, base, v):
        return np.asarray(base, float) + v

    def tangent_norm(self, base, v):
        return float(np.linalg.norm(v))

    def tangent_norms(self, base, vs):
        return np.linalg.norm(np.asarray(vs), axis=-1)


class BrokenEuclideanSpace(EuclideanSpace):
    """Negative control: Euclidean distance, but ``t -> x + t^2 (y - x)``
    instead of the segment. This is not a geodesic, so the comparison
    checkers must catch it."""

    kind = "broken"

    def geodesic(self, x, y, t):
        t = check_t(t)
        x = np.asarray(x, float)
        return x + t * t * (np.asarray(y, float) - x)


def minkowski(x, y):
    """Lorentzian inner product ``-x0 y0 + sum xi yi`` over the last axis."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    return np.sum(x[..., 1:] * y[..., 1:], axis=-1) - x[..., 0] * y[..., 0]


def lift(spatial):
    """Hyperboloid point with the given spatial coordinates."""
    spatial = np.asarray(spatial, float)
    x0 = np.sqrt(1.0 + np.sum(spatial ** 2, axis=-1, keepdims=True))
    return np.concatenate([x0, spatial], axis=-1)


def hyperboloid_distance(x, y):
    """``arccosh(-<x, y>)``, evaluated stably for nearby points."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    u = -minkowski(x, y)
    diff = x - y
    chord2 = np.maximum(minkowski(diff, diff), 0.0)
    near = 2.0 * np.arcsinh(np.sqrt(chord2) / 2.0)
    far = np.arccosh(np.maximum(u, 1.0))
    d = np.where(u < 1.5, near, far)
    return float(d) if np.ndim(d) == 0 else d


def hyperboloid_geodesic(x, y, t):
    t = check_t(t)
    x, y = np.asarray(x, float), np.asarray(y, float)
    if t == 0.0:
        return x.copy()
    if t == 1.0:
        return y.copy()
    d = np.asarray(hyperboloid_distance(x, y))[..., None]
    small = d < 1e-8
    ds = np.where(small, 1.0, d)
    ca = np.where(small, 1 - t, np.sinh((1 - t) * ds) / np.sinh(ds))
    cb = np.where(small, t, np.sinh(t * ds) / np.sinh(ds))
    return lift((ca * x + cb * y)[..., 1:])


class HyperboloidSpace(HadamardSpace):
    """Upper sheet of ``<x, x> = -1`` in Minkowski space R^{1,d}.

    Points are arrays ``(x0, x1, ..., xd)`` with ``x0 > 0``; results of
    arithmetic are re-lifted from their spatial part so the constraint holds
    to round-off.
    """

    kind = "hyperboloid"

    @property
    def point_shape(self):
        return (self.dim + 1,)

    def validate(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1:] != self.point_shape:
            raise DomainError(f"expected shape (..., {self.dim + 1}), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise DomainError("point has non-finite coordinates")
        if np.any(x[..., 0] <= 0):
            raise DomainError("hyperboloid point must have x0 > 0")
        err = np.abs(minkowski(x, x) + 1.0)
        if np.any(err > HYPERBOLOID_TOL * np.maximum(1.0, x[..., 0] ** 2)):
            raise DomainError(f"point violates <x,x> = -1 by {np.max(err):.3g}")
        return lift(x[..., 1:])

    def distance(self, x, y):
        return hyperboloid_distance(x, y)

    def geodesic(self, x, y, t):
        return hyperboloid_geodesic(x, y, t)

    def random_point(self, rng, scale=1.0):
        return lift(rng.standard_normal(self.dim) * scale)

    def log_map(self, base, x):
        base, x = np.asarray(base, float), np.asarray(x, float)
        d = np.asarray(hyperboloid_distance(base, x))[..., None]
        u = x + minkowski(base, x)[..., None] * base
        n = np.sqrt(np.maximum(minkowski(u, u), 0.0))[..., None]
        return np.where(n > 0, d * u / np.where(n > 0, n, 1.0), 0.0)

    def exp_map(self, base, v):
        base, v = np.asarray(base, float), np.asarray(v, float)
        n = np.sqrt(max(float(minkowski(v, v)), 0.0))
        if n == 0.0:
            return base.copy()
        return lift((np.cosh(n) * base + np.sinh(n) / n * v)[1:])

    def tangent_norm(self, base, v):
        return float(np.sqrt(max(float(minkowski(v, v)), 0.0)))

    def tangent_norms(self, base, vs):
        return np.sqrt(np.maximum(minkowski(vs, vs), 0.0))


_SPACES = {
    "euclid": EuclideanSpace,
    "spd": SPDSpace,
    "hyperboloid": HyperboloidSpace,
    "broken": BrokenEuclideanSpace,
}


def parse_space(spec):
    """Build a space from a string such as ``"spd:3"`` or ``"euclid:4"``."""
    if isinstance(spec, HadamardSpace):
        return spec
    kind, _, dim = str(spec).partition(":")
    if kind not in _SPACES:
        raise ValueError(f"unknown space {kind!r}; expected one of {sorted(_SPACES)}")
    try:
        dim = int(dim)
    except ValueError:
        raise ValueError(f"space {spec!r} needs an integer dimension, e.g. {kind}:3") from None
    return _SPACES[kind](dim)
