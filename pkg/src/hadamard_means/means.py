"""Inductive means, barycenters of finite measures, and the inequalities
relating them."""

from dataclasses import dataclass

import numpy as np

from .core import DEFAULT_ATOL, DEFAULT_RTOL, DomainError, InequalitySlack
from .spaces import EuclideanSpace

#: maximum number of step halvings per barycenter iteration
MAX_HALVINGS = 40


class EmpiricalMeasure:
    """Finitely supported probability measure ``sum_j w_j delta_{x_j}``.

    Parameters
    ----------
    points : sequence of points or ndarray with a leading atom axis
    weights : sequence of positive floats, optional
        Normalized to sum to one. Equal weights if omitted.
    """

    def __init__(self, points, weights=None):
        points = np.asarray(points, dtype=float)
        if len(points) == 0:
            raise ValueError("an empirical measure needs at least one atom")
        if weights is None:
            weights = np.full(len(points), 1.0 / len(points))
        else:
            weights = np.asarray(weights, dtype=float)
            if weights.shape != (len(points),):
                raise ValueError(
                    f"got {len(weights)} weights for {len(points)} atoms")
            if np.any(~np.isfinite(weights)) or np.any(weights <= 0):
                raise ValueError("weights must be positive and finite")
            weights = weights / weights.sum()
        self.points = points
        self.weights = weights

    def __len__(self):
        return len(self.points)

    def __iter__(self):
        return iter(zip(self.points, self.weights))

    @classmethod
    def uniform(cls, points):
        return cls(points)


@dataclass
class BarycenterResult:
    point: np.ndarray
    objective: float
    iterations: int
    converged: bool
    final_step: float

    def to_dict(self):
        return {
            "point": np.asarray(self.point).tolist(),
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "final_step": self.final_step,
        }


@dataclass(frozen=True)
class InductiveState:
    """Running inductive mean ``S_n`` after ``n`` points.

    ``diameter_bound`` is the running maximum of ``d(S_{k-1}, a_k)``, a lower
    bound for the diameter of the visited points.
    """

    n: int
    current: np.ndarray
    diameter_bound: float = 0.0

    @classmethod
    def start(cls, point, space=None):
        if space is not None:
            point = space.validate(point)
        return cls(1, np.asarray(point, dtype=float), 0.0)


def inductive_step(state, point, space):
    """``S_{n+1} = S_n #_{1/(n+1)} a_{n+1}``."""
    if state.n < 1:
        raise ValueError("inductive state must have n >= 1")
    point = space.validate(point)
    new, dist = space.geodesic_with_distance(
        state.current, point, 1.0 / (state.n + 1))
    return InductiveState(state.n + 1, new, max(state.diameter_bound, float(dist)))


def inductive_means(sequence, space):
    """Yield ``S_1, S_2, ...`` for the given sequence."""
    it = iter(sequence)
    try:
        first = next(it)
    except StopIteration:
        raise ValueError("inductive mean of an empty sequence") from None
    state = InductiveState.start(first, space)
    yield state.current
    for x in it:
        state = inductive_step(state, x, space)
        yield state.current


def inductive_mean(sequence, space):
    """Inductive mean ``S_n`` of a finite sequence.

    Equals the arithmetic mean in Euclidean space. Depends on the order of
    the sequence in curved spaces.
    """
    s = None
    for s in inductive_means(sequence, space):
        pass
    if s is None:
        raise ValueError("inductive mean of an empty sequence")
    return s


def inductive_mean_batch(sequences, space):
    """Inductive means of several equal-length sequences at once.

    ``sequences`` has shape ``(batch, length) + point_shape``; the result
    has shape ``(batch,) + point_shape``. Same values as calling
    :func:`inductive_mean` per row, but each step is one vectorized
    geodesic evaluation.
    """
    seqs = np.asarray(sequences, dtype=float)
    if seqs.ndim < 3 or seqs.shape[1] == 0:
        raise ValueError(f"expected shape (batch, length, ...), got {seqs.shape}")
    if not np.all(np.isfinite(seqs)):
        raise DomainError("sequences contain non-finite entries")
    cur = seqs[:, 0].copy()
    for k in range(1, seqs.shape[1]):
        cur = space.geodesic(cur, seqs[:, k], 1.0 / (k + 1))
    return cur


def _objective(space, z, measure):
    d = np.asarray(space.distance(z, measure.points))
    return float(np.dot(measure.weights, d ** 2))


def karcher_mean(measure, space, tol=None, max_iter=500, init=None):
    """Barycenter of a finite weighted point set.

    Minimizes ``z -> sum_j w_j d(z, x_j)^2``. Euclidean spaces use the
    weighted average directly. Otherwise the iteration is
    ``z <- exp_z(s * sum_j w_j log_z(x_j))`` with ``s = 1`` and halving
    while the objective increases. Stops when the norm of the averaged
    tangent vector at the current point is at most ``tol``.

    Parameters
    ----------
    measure : EmpiricalMeasure or sequence of points
    space : HadamardSpace
    tol : float, optional
        Defaults to ``space.default_tol``.
    max_iter : int
    init : point, optional
        Starting point; the first atom by default.

    Returns
    -------
    BarycenterResult
        ``converged`` is False if ``max_iter`` was exhausted.
    """
    if not isinstance(measure, EmpiricalMeasure):
        measure = EmpiricalMeasure(measure)
    if tol is None:
        tol = space.default_tol
    if tol <= 0:
        raise ValueError("tol must be positive")
    points, w = measure.points, measure.weights

    if isinstance(space, EuclideanSpace) and type(space).geodesic is EuclideanSpace.geodesic:
        z = np.tensordot(w, points, axes=1)
        return BarycenterResult(z, _objective(space, z, measure), 1, True, 0.0)

    z = space.validate(points[0] if init is None else init)
    logs = space.log_map(z, points)
    f = float(np.dot(w, space.tangent_norms(z, logs) ** 2))
    step_norm = np.inf
    for it in range(max_iter + 1):
        v = np.tensordot(w, logs, axes=1)
        grad_norm = space.tangent_norm(z, v)
        if grad_norm <= tol:
            return BarycenterResult(z, f, it, True, grad_norm)
        if it == max_iter:
            break
        s = 1.0
        for _ in range(MAX_HALVINGS):
            z_new = space.exp_map(z, s * v)
            logs_new = space.log_map(z_new, points)
            f_new = float(np.dot(w, space.tangent_norms(z_new, logs_new) ** 2))
            if f_new <= f * (1 + 1e-14):
                break
            s /= 2
        z, logs, f = z_new, logs_new, f_new
        step_norm = s * grad_norm
    return BarycenterResult(z, f, max_iter, False, float(step_norm))


def diameter(points, space):
    """Largest pairwise distance in a finite point list."""
    pts = list(points)
    best = 0.0
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            best = max(best, float(space.distance(pts[i], pts[j])))
    return best


def check_variance_inequality(measure, space, z, bary, atol=DEFAULT_ATOL,
                              rtol=DEFAULT_RTOL):
    """``d(z, b)^2 <= sum_j w_j [d(z, x_j)^2 - d(b, x_j)^2]`` for the
    barycenter ``b`` of ``measure``."""
    if not isinstance(measure, EmpiricalMeasure):
        measure = EmpiricalMeasure(measure)
    z, bary = space.validate(z), space.validate(bary)
    rhs = sum(wj * (space.distance(z, x) ** 2 - space.distance(bary, x) ** 2)
              for x, wj in measure)
    lhs = space.distance(z, bary) ** 2
    return InequalitySlack.of(lhs, rhs, atol, rtol)


def check_contraction(seq_a, seq_b, space, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
    """``d(S_n(a), S_n(b)) <= (1/n) sum_i d(a_i, b_i)``."""
    seq_a, seq_b = list(seq_a), list(seq_b)
    if len(seq_a) != len(seq_b):
        raise ValueError(f"sequence lengths differ: {len(seq_a)} != {len(seq_b)}")
    if not seq_a:
        raise ValueError("sequences must be nonempty")
    lhs = space.distance(inductive_mean(seq_a, space), inductive_mean(seq_b, space))
    rhs = np.mean([space.distance(a, b) for a, b in zip(seq_a, seq_b)])
    return InequalitySlack.of(lhs, rhs, atol, rtol)


def _prefix_means(seq, upto, space):
    # S_1 .. S_upto, 1-indexed through a leading None
    out = [None]
    for i, s in enumerate(inductive_means(seq[:upto], space)):
        out.append(s)
    return out


def _check_km(seq, k, m):
    if k < 1 or m < 1:
        raise IndexError(f"need k >= 1 and m >= 1, got k={k}, m={m}")
    if k + m > len(seq):
        raise IndexError(f"k + m = {k + m} exceeds sequence length {len(seq)}")


def check_weighted_inequality(seq, z, k, m, space, atol=DEFAULT_ATOL,
                              rtol=DEFAULT_RTOL):
    """Recursive bound on ``d(S_{k+m}, z)^2``::

        d^2(S_{k+m}, z) <= k/(k+m) d^2(S_k, z)
                           + 1/(k+m) sum_{j<m} d^2(a_{k+j+1}, z)
                           - k/(k+m)^2 sum_{j<m} d^2(S_{k+j}, a_{k+j+1})

    Sequence indices are 1-based as in the formula.
    """
    seq = list(seq)
    _check_km(seq, k, m)
    z = space.validate(z)
    S = _prefix_means(seq, k + m, space)
    a = [None] + seq
    d2 = lambda p, q: space.distance(p, q) ** 2  # noqa: E731
    lhs = d2(S[k + m], z)
    rhs = (k / (k + m) * d2(S[k], z)
           + sum(d2(a[k + j + 1], z) for j in range(m)) / (k + m)
           - k / (k + m) ** 2 * sum(d2(S[k + j], a[k + j + 1]) for j in range(m)))
    return InequalitySlack.of(lhs, rhs, atol, rtol)


def remainder_bound(m, k, diam):
    """``(m^2/(k+1)^2 + 2m/(k+1)) * diam^2``."""
    return (m ** 2 / (k + 1) ** 2 + 2 * m / (k + 1)) * diam ** 2


def check_diameter_bound(seq, k, m, space, atol=DEFAULT_ATOL, rtol=DEFAULT_RTOL):
    """Freezing the inductive mean at ``S_k`` costs at most the remainder::

        (1/m) sum_{j<m} d^2(S_k, a_{k+j+1})
            <= R(m, k) + (1/m) sum_{j<m} d^2(S_{k+j}, a_{k+j+1})

    with ``R(m, k) = (m^2/(k+1)^2 + 2m/(k+1)) diam(seq)^2``.
    """
    seq = list(seq)
    _check_km(seq, k, m)
    S = _prefix_means(seq, k + m, space)
    a = [None] + seq
    d2 = lambda p, q: space.distance(p, q) ** 2  # noqa: E731
    lhs = sum(d2(S[k], a[k + j + 1]) for j in range(m)) / m
    rhs = (remainder_bound(m, k, diameter(seq, space))
           + sum(d2(S[k + j], a[k + j + 1]) for j in range(m)) / m)
    return InequalitySlack.of(lhs, rhs, atol, rtol)
