"""Kronecker systems and inductive means along their orbits.

A Kronecker system here is either a torus ``(R/Z)^d`` rotated by a fixed
vector ``alpha`` or a cyclic group ``Z/dZ`` shifted by a generator. Torus
elements are float arrays of shape ``(d,)``; cyclic elements are ints.
"""

import csv
import io
import math
import time
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .core import DEFAULT_ATOL, DEFAULT_RTOL, InequalitySlack
from .means import EmpiricalMeasure, karcher_mean

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0

TRACE_COLUMNS = ("n", "delta_to_reference", "diameter_bound")


class NonErgodicWarning(UserWarning):
    """The shift of a Kronecker system is not ergodic."""


def _looks_rational(x, max_den=10 ** 6):
    frac = Fraction(x).limit_denominator(max_den)
    return abs(float(frac) - x) <= 1e-15


@dataclass(frozen=True)
class KroneckerSystem:
    """Compact abelian group with the translation ``h -> h + shift``.

    Use :meth:`torus` or :meth:`cyclic` to build one.
    """

    kind: str
    d: int
    shift: tuple
    ergodic: bool

    @classmethod
    def torus(cls, alpha, ergodic=None):
        """Rotation of the d-torus by ``alpha``.

        ``ergodic`` records the caller's claim that ``(1, alpha_1, ...,
        alpha_d)`` are rationally independent. If omitted, the system is
        flagged non-ergodic when some ``alpha_i`` is within 1e-15 of a
        fraction with denominator at most 10^6; relations between
        coordinates are not examined.
        """
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float)) % 1.0
        if alpha.ndim != 1:
            raise ValueError("alpha must be a scalar or a 1-d vector")
        if ergodic is None:
            ergodic = not any(_looks_rational(float(a)) for a in alpha)
        return cls("torus", len(alpha), tuple(float(a) for a in alpha), bool(ergodic))

    @classmethod
    def cyclic(cls, d, generator=1):
        d, generator = int(d), int(generator)
        if d < 1:
            raise ValueError("cyclic group order must be positive")
        return cls("cyclic", d, (generator % d,), math.gcd(generator, d) == 1)

    @property
    def alpha(self):
        return np.array(self.shift)

    @property
    def generator(self):
        return self.shift[0]

    @property
    def identity(self):
        return np.zeros(self.d) if self.kind == "torus" else 0

    def element(self, g):
        """Normalize ``g`` into the group's canonical representation."""
        if self.kind == "torus":
            g = np.asarray(g, dtype=float) % 1.0
            if g.ndim == 0:
                g = np.full(self.d, float(g)) if self.d == 1 else g
            if g.shape[-1:] != (self.d,):
                raise ValueError(f"torus({self.d}) element must have length {self.d}")
            return g
        return np.asarray(g, dtype=np.int64) % self.d

    def add(self, g, h):
        if self.kind == "torus":
            return (np.asarray(g, float) + np.asarray(h, float)) % 1.0
        return (np.asarray(g) + np.asarray(h)) % self.d

    def is_identity(self, h):
        if self.kind == "torus":
            return bool(np.all(np.asarray(h, float) % 1.0 == 0.0))
        return int(h) % self.d == 0

    def metric(self, x, y):
        """Shift-invariant metric.

        Torus: ``max_i min(|x_i - y_i|, 1 - |x_i - y_i|)``. Cyclic: circular
        distance divided by the group order.
        """
        if self.kind == "torus":
            diff = np.abs(np.asarray(x, float) - np.asarray(y, float)) % 1.0
            return float(np.max(np.minimum(diff, 1.0 - diff)))
        k = (int(x) - int(y)) % self.d
        return min(k, self.d - k) / self.d

    def haar_sample(self, rng, size):
        if self.kind == "torus":
            return rng.uniform(0.0, 1.0, size=(size, self.d))
        return rng.integers(0, self.d, size=size)

    def grid(self, n):
        """Equal-weight quadrature nodes for the Haar measure.

        Torus: midpoint product grid with ``round(n^(1/d))`` nodes per axis.
        Cyclic: every element (``n`` is ignored; the quadrature is exact).
        """
        if n < 1:
            raise ValueError("quadrature size must be positive")
        if self.kind == "cyclic":
            return np.arange(self.d)
        k = max(1, int(round(n ** (1.0 / self.d))))
        axis = (np.arange(k) + 0.5) / k
        mesh = np.meshgrid(*([axis] * self.d), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def ball(self, radius, samples):
        """Offsets discretizing the metric ball of ``radius`` about the identity.

        Returns ``(offsets, haar_measure_of_ball)``.
        """
        if self.kind == "cyclic":
            ks = np.arange(self.d)
            inside = np.minimum(ks, self.d - ks) / self.d <= radius
            return ks[inside], inside.sum() / self.d
        radius = min(radius, 0.5)
        k = max(1, int(math.ceil(samples ** (1.0 / self.d))))
        axis = -radius + (np.arange(k) + 0.5) * (2 * radius / k)
        mesh = np.meshgrid(*([axis] * self.d), indexing="ij")
        offsets = np.stack([m.ravel() for m in mesh], axis=-1)
        return offsets, (2 * radius) ** self.d

    def to_dict(self):
        out = {"type": self.kind, "d": self.d, "ergodic": self.ergodic}
        if self.kind == "torus":
            out["alpha"] = list(self.shift)
        else:
            out["generator"] = self.generator
        return out


class _Walker:
    """Advances one or several orbit points in lockstep.

    Torus coordinates are accumulated with Kahan compensation and wrapped
    into [0, 1) by an exact subtraction.
    """

    def __init__(self, system, starts):
        self.system = system
        if system.kind == "torus":
            self.x = np.array(system.element(starts), dtype=float)
            self.c = np.zeros_like(self.x)
            self.alpha = system.alpha
        else:
            self.x = np.array(system.element(starts), dtype=np.int64)

    def advance(self):
        if self.system.kind == "torus":
            y = self.alpha - self.c
            t = self.x + y
            self.c = (t - self.x) - y
            self.x = np.where(t >= 1.0, t - 1.0, t)
        else:
            self.x = (self.x + self.system.generator) % self.system.d


def orbit(system, start, n):
    """``[start, tau(start), ..., tau^(n-1)(start)]``.

    Returns an array of shape ``(n, d)`` for tori and ``(n,)`` for cyclic
    groups.
    """
    if n < 1:
        raise ValueError("orbit length must be positive")
    walker = _Walker(system, start)
    out = []
    for _ in range(n):
        out.append(walker.x.copy())
        walker.advance()
    return np.array(out)


def birkhoff_average(system, f, start, n):
    """``(1/n) sum_{k<n} f(tau^k(start))`` for a real-valued ``f``."""
    if n < 1:
        raise ValueError("n must be positive")
    walker = _Walker(system, start)
    vals = []
    for _ in range(n):
        vals.append(float(f(walker.x)))
        walker.advance()
    return math.fsum(vals) / n


class OrbitFunction:
    """A map from group elements to points of a Hadamard space.

    Parameters
    ----------
    fn : callable
        ``fn(g) -> point`` for a single group element.
    regularity : {"continuous", "l1", "stepwise"}
    batch : callable, optional
        ``batch(gs) -> stacked points`` for an array of elements; used for
        speed when given, and must agree with ``fn``.
    name : str, optional
    """

    REGULARITIES = ("continuous", "l1", "stepwise")

    def __init__(self, fn, regularity="continuous", batch=None, name=None):
        if regularity not in self.REGULARITIES:
            raise ValueError(f"regularity must be one of {self.REGULARITIES}")
        self.fn = fn
        self.regularity = regularity
        self.batch = batch
        self.name = name or getattr(fn, "__name__", "A")

    def __repr__(self):
        return f"OrbitFunction({self.name}, {self.regularity})"

    def __call__(self, g):
        return np.asarray(self.fn(g), dtype=float)

    def many(self, gs):
        if self.batch is not None:
            return np.asarray(self.batch(gs), dtype=float)
        return np.stack([self(g) for g in gs])


def mean_distance(A, B, system, space, quadrature_n=10_000, p=1, shift=None):
    """Quadrature estimate of ``int_G d(A(g), B(g + shift))^p dm(g)``."""
    nodes = system.grid(quadrature_n)
    a = A.many(nodes)
    b = B.many(nodes if shift is None else system.add(nodes, shift))
    d = np.asarray(space.distance(a, b), dtype=float)
    return float(np.mean(d ** p))


def estimate_pushforward_barycenter(system, A, quadrature_n, space, tol=None,
                                    max_iter=500):
    """Barycenter of the image of the Haar measure under ``A``.

    The Haar measure is replaced by equal weights on :meth:`KroneckerSystem.grid`,
    which is exact for cyclic groups.
    """
    if quadrature_n < 1:
        raise ValueError("quadrature_n must be positive")
    atoms = A.many(system.grid(quadrature_n))
    return karcher_mean(EmpiricalMeasure(atoms), space, tol=tol, max_iter=max_iter)


def checkpoint_schedule(n_max, extra=()):
    """Powers of two up to ``n_max``, plus ``n_max`` and any ``extra`` values."""
    if n_max < 1:
        raise ValueError("n_max must be positive")
    pts = {1 << k for k in range(n_max.bit_length()) if (1 << k) <= n_max}
    pts.add(n_max)
    pts.update(int(e) for e in extra if 1 <= int(e) <= n_max)
    return sorted(pts)


@dataclass
class TraceEntry:
    n: int
    point: np.ndarray
    delta: float
    diameter_bound: float


@dataclass
class ConvergenceTrace:
    """Checkpointed distances from the inductive means to a reference point."""

    entries: list
    reference: np.ndarray
    diameter_bound: float = 0.0
    start: object = None
    metadata: dict = field(default_factory=dict)

    @property
    def ns(self):
        return [e.n for e in self.entries]

    @property
    def deltas(self):
        return np.array([e.delta for e in self.entries])

    @property
    def final(self):
        return self.entries[-1]

    @property
    def final_delta(self):
        return self.entries[-1].delta

    def delta_at(self, n):
        for e in self.entries:
            if e.n == n:
                return e.delta
        raise KeyError(f"no checkpoint at n={n}")

    def rows(self):
        return [(e.n, e.delta, e.diameter_bound) for e in self.entries]

    def to_csv(self, fh=None):
        """Write ``n,delta_to_reference,diameter_bound`` rows.

        Returns the text when ``fh`` is None.
        """
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for n, delta, diam in self.rows():
            w.writerow([n, repr(float(delta)), repr(float(diam))])
        if fh is None:
            return buf.getvalue()

    def to_dict(self):
        start = self.start
        if isinstance(start, np.ndarray):
            start = start.tolist()
        elif isinstance(start, np.integer):
            start = int(start)
        return {
            "start": start,
            "reference": np.asarray(self.reference).tolist(),
            "final_point": np.asarray(self.final.point).tolist(),
            "final_delta": self.final_delta,
            "diameter_bound": self.diameter_bound,
            "rows": [list(r) for r in self.rows()],
            "metadata": self.metadata,
        }


def multi_start_run(system, A, starts, n_max, space, reference=None,
                    quadrature_n=10_000, checkpoints=()):
    """Run inductive means along several orbits in lockstep.

    Equivalent to calling :func:`ergodic_inductive_run` once per start,
    but the geodesic steps of all starts are batched.

    Returns
    -------
    list of ConvergenceTrace
    """
    t0 = time.perf_counter()
    meta = {"system": system.to_dict(), "ergodic": system.ergodic, "warnings": []}
    if not system.ergodic:
        msg = f"shift of {system.kind}({system.d}) is not ergodic; the limit need not be b(A)"
        warnings.warn(msg, NonErgodicWarning, stacklevel=2)
        meta["warnings"].append(msg)
    if reference is None:
        res = estimate_pushforward_barycenter(system, A, quadrature_n, space)
        if not res.converged:
            meta["warnings"].append("reference barycenter solver did not converge")
        reference = res.point
        meta["reference_source"] = f"pushforward barycenter on {quadrature_n}-point grid"
    else:
        meta["reference_source"] = "explicit"
    reference = space.validate(reference)

    schedule = checkpoint_schedule(n_max, checkpoints)
    walker = _Walker(system, starts)
    k = len(walker.x)
    cyclic = system.kind == "cyclic"
    visits = np.zeros((k, system.d), dtype=np.int64) if cyclic else None

    def visit():
        if cyclic:
            visits[np.arange(k), walker.x] += 1

    visit()
    current = space.validate(A.many(walker.x))
    diam = np.zeros(k)
    records = [[] for _ in range(k)]
    nxt = 0

    def record(n):
        d = np.atleast_1d(space.distance(current, reference))
        for i in range(k):
            records[i].append(TraceEntry(n, current[i].copy(), float(d[i]), float(diam[i])))

    for n in range(1, n_max + 1):
        if n > 1:
            walker.advance()
            visit()
            new, dist = space.geodesic_with_distance(current, A.many(walker.x), 1.0 / n)
            current = new
            diam = np.maximum(diam, dist)
        if n == schedule[nxt]:
            record(n)
            nxt += 1

    starts_arr = np.asarray(system.element(starts))
    elapsed = time.perf_counter() - t0
    traces = []
    for i in range(k):
        m = dict(meta, wall_time=elapsed, n_max=n_max, batch_size=k)
        if cyclic:
            m["visits"] = visits[i].tolist()
        traces.append(ConvergenceTrace(records[i], reference, float(diam[i]),
                                       starts_arr[i], m))
    return traces


def ergodic_inductive_run(system, A, start, n_max, space, reference=None,
                          quadrature_n=10_000, checkpoints=()):
    """Inductive means ``S_n`` of ``A(start), A(tau(start)), ...``.

    Distances to ``reference`` are recorded at powers of two, at ``n_max``
    and at any extra ``checkpoints``. When ``reference`` is None it is the
    pushforward barycenter estimated on a ``quadrature_n``-point grid.
    Memory use does not grow with ``n_max``.
    """
    starts = np.asarray(system.element(start))[None]
    return multi_start_run(system, A, starts, n_max, space, reference,
                           quadrature_n, checkpoints)[0]


def check_orbit_contraction(system, A, B, start, n, space, eps,
                            quadrature_n=10_000, atol=DEFAULT_ATOL,
                            rtol=DEFAULT_RTOL):
    """``d(S_n(a(g)), S_n(b(g))) <= eps + int_G d(A, B) dm`` along one orbit."""
    walker = _Walker(system, np.asarray(system.element(start))[None])
    sa = space.validate(A.many(walker.x))
    sb = space.validate(B.many(walker.x))
    for k in range(2, n + 1):
        walker.advance()
        sa = space.geodesic(sa, A.many(walker.x), 1.0 / k)
        sb = space.geodesic(sb, B.many(walker.x), 1.0 / k)
    lhs = float(np.atleast_1d(space.distance(sa, sb))[0])
    rhs = eps + mean_distance(A, B, system, space, quadrature_n)
    return InequalitySlack.of(lhs, rhs, atol, rtol)
