"""Named orbit functions used by experiments, configs and tests.

Each factory returns an :class:`~hadamard_means.ergodic.OrbitFunction` with
a vectorized ``batch`` implementation. Torus elements are indexed by their
first coordinate.
"""

import numpy as np

from .ergodic import OrbitFunction
from .spaces import EuclideanSpace, SPDSpace, random_spd, sym_exp

DEFAULT_D = (1.0, 0.5, -0.5)


def _first(gs):
    return np.asarray(gs, dtype=float)[..., 0]


def constant(point):
    point = np.asarray(point, dtype=float)

    def batch(gs):
        return np.broadcast_to(point, (len(gs),) + point.shape).copy()

    return OrbitFunction(lambda g: point.copy(), "continuous", batch, "constant")


def sine(amplitude=1.0):
    """R^1-valued ``amplitude * sin(2 pi g)``; its Haar integral is 0."""
    def batch(gs):
        return (amplitude * np.sin(2 * np.pi * _first(gs)))[..., None]

    return OrbitFunction(lambda g: batch(np.atleast_2d(g))[0], "continuous", batch, "sine")


def coordinate():
    """R^1-valued ``g -> g`` with values in [0, 1); discontinuous at 0."""
    def batch(gs):
        return _first(gs)[..., None].copy()

    return OrbitFunction(lambda g: batch(np.atleast_2d(g))[0], "stepwise", batch, "coordinate")


def _diag_exp(profile, diag):
    # exp(profile * diag(D)) for each profile value, as diagonal matrices
    diag = np.asarray(diag, dtype=float)
    vals = np.exp(np.asarray(profile)[..., None] * diag)
    out = np.zeros(vals.shape + (len(diag),))
    idx = np.arange(len(diag))
    out[..., idx, idx] = vals
    return out


def exp_sine(diag=DEFAULT_D):
    """SPD-valued ``exp(sin(2 pi g) D)`` with ``D = diag(diag)``.

    The values commute, so the barycenter is ``exp(c D)`` where ``c`` is the
    Haar average of ``sin(2 pi g)``, i.e. the identity.
    """
    def batch(gs):
        return _diag_exp(np.sin(2 * np.pi * _first(gs)), diag)

    return OrbitFunction(lambda g: batch(np.atleast_2d(g))[0], "continuous", batch, "exp_sine")


def coset_cosine(freq=4, diag=DEFAULT_D):
    """SPD-valued ``exp(cos(2 pi freq g) D)``.

    Invariant under translation by ``1/freq``, so a rotation by ``1/freq``
    sees a single value along each orbit while the Haar barycenter is the
    identity.
    """
    def batch(gs):
        return _diag_exp(np.cos(2 * np.pi * freq * _first(gs)), diag)

    return OrbitFunction(lambda g: batch(np.atleast_2d(g))[0], "continuous", batch, "coset_cosine")


def unit_direction(n, seed=0):
    """Deterministic symmetric ``n x n`` matrix of unit Frobenius norm with
    nonzero off-diagonal part."""
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((n, n))
    h = (h + h.T) / 2
    return h / np.linalg.norm(h)


class SpdStep:
    """Two-piece SPD step function on the circle.

    ``A(g) = I`` for ``g < split`` and ``exp(jump * H)`` otherwise, with
    ``H`` of unit Frobenius norm, so the jump has size ``jump`` in the
    affine-invariant metric. The pushforward barycenter is
    ``exp((1 - split) * jump * H)``.
    """

    def __init__(self, n=3, split=0.5, jump=1.0, seed=0):
        self.n, self.split, self.jump = n, float(split), float(jump)
        self.low = np.eye(n)
        self.direction = unit_direction(n, seed)
        self.high = sym_exp(self.jump * self.direction)

    def batch(self, gs):
        hi = _first(gs) >= self.split
        return np.where(hi[..., None, None], self.high, self.low)

    def function(self):
        return OrbitFunction(lambda g: self.batch(np.atleast_2d(g))[0], "stepwise",
                             self.batch, "spd_step")

    @property
    def barycenter(self):
        return sym_exp((1.0 - self.split) * self.jump * self.direction)

    @property
    def discontinuities(self):
        return (0.0, self.split)


def spd_step(n=3, split=0.5, jump=1.0, seed=0):
    return SpdStep(n, split, jump, seed).function()


def cyclic_atoms(atoms):
    """``A(k) = atoms[k]`` on a cyclic group."""
    atoms = np.asarray(atoms, dtype=float)

    def batch(ks):
        return atoms[np.asarray(ks, dtype=np.int64)]

    return OrbitFunction(lambda k: atoms[int(k)].copy(), "stepwise", batch, "cyclic_atoms")


def perturb(A, start, width, shift=0.5):
    """``A`` with its values on ``[start, start + width)`` replaced by
    ``A(g + shift)``; torus(1) only. Differs from ``A`` on a set of measure
    at most ``width``."""
    def batch(gs):
        g = _first(gs)
        inside = ((g - start) % 1.0) < width
        vals = A.many(gs)
        if inside.any():
            shifted = np.asarray(gs, dtype=float)[inside].copy()
            shifted[..., 0] = (shifted[..., 0] + shift) % 1.0
            vals[inside] = A.many(shifted)
        return vals

    return OrbitFunction(lambda g: batch(np.atleast_2d(g))[0], A.regularity, batch,
                         f"{A.name}_perturbed")


def random_atoms(space, count, rng, max_cond=100.0):
    """``count`` seeded random points; SPD atoms have condition number
    at most ``max_cond``."""
    if isinstance(space, SPDSpace):
        return np.stack([random_spd(space.dim, rng, max_cond=max_cond)
                         for _ in range(count)])
    return np.stack([space.random_point(rng) for _ in range(count)])


def check_compatible(name, space):
    """Raise ValueError if the named function cannot take values in ``space``."""
    euclid = {"sine", "sin", "coordinate"}
    spd = {"exp_sine", "coset_cosine", "spd_step"}
    if name in euclid and not (isinstance(space, EuclideanSpace) and space.dim == 1):
        raise ValueError(f"function {name!r} needs space euclid:1")
    if name in spd and not isinstance(space, SPDSpace):
        raise ValueError(f"function {name!r} needs an spd space")


def build(name, space, params=None):
    """Build a named function from config parameters."""
    params = dict(params or {})
    check_compatible(name, space)
    if name in ("sine", "sin"):
        return sine(params.get("amplitude", 1.0))
    if name == "coordinate":
        return coordinate()
    if name == "exp_sine":
        return exp_sine(_diag_param(params, space))
    if name == "coset_cosine":
        return coset_cosine(params.get("freq", 4), _diag_param(params, space))
    if name == "spd_step":
        return spd_step(space.dim, params.get("split", 0.5), params.get("jump", 1.0),
                        params.get("seed", 0))
    if name == "constant":
        return constant(space.from_json(params["point"]))
    raise ValueError(f"unknown function {name!r}")


def _diag_param(params, space):
    diag = params.get("diag")
    if diag is None:
        diag = DEFAULT_D if space.dim == 3 else np.linspace(1.0, -0.5, space.dim)
    if len(diag) != space.dim:
        raise ValueError(f"diag has {len(diag)} entries for spd:{space.dim}")
    return tuple(float(x) for x in diag)


NAMES = ("sine", "sin", "coordinate", "exp_sine", "coset_cosine", "spd_step", "constant")
