"""Score estimation by damped Newton on the strongly convex posterior loss.

The loss over scores theta is

    (1 / 2 sigma^2) sum_a theta_a^2
        + sum_{pairs} Phi(theta_a - theta_b) - r_ab (theta_a - theta_b)

with each unordered pair counted once in canonical orientation (the value is
unchanged under an orientation flip because Phi is even and r antisymmetric).
The quadratic term makes the loss (1/sigma^2)-strongly convex, which gives a
certified stopping rule: for any iterate x,

    || x - theta* ||_2 <= 2 sigma^2 || grad(x) ||_2

so the solver stops when that bound drops below the requested tolerance and
reports it as ``certified_error``. The Gaussian comparison model also admits
a direct linear solve, kept as an independent path for cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
from scipy.sparse.linalg import LinearOperator, cg as sparse_cg

from .comparisons import AlternativeSet, ComparisonMatrix
from .errors import MismatchError, ParameterError, SolverError
from .rootlaws import RootLaw

__all__ = [
    "PriorConfig",
    "SolverOptions",
    "ScoreVector",
    "SolveReport",
    "loss",
    "gradient",
    "hessian",
    "map_estimate",
    "map_estimate_gaussian",
    "connected_components",
]

_DENSE_LIMIT = 2000  # Cholesky below, Jacobi-preconditioned CG above
_ARMIJO_C = 1e-4


@dataclass(frozen=True)
class PriorConfig:
    """Variance of the i.i.d. centered Gaussian prior on scores.

    ``sigma_sq=math.inf`` selects the unregularized variant (no quadratic
    term). That loss is only shift-invariant-convex, so the solver then
    requires a connected comparison graph, pins the zero-sum gauge,
    and stops on the plain gradient norm instead of the certified bound.
    """

    sigma_sq: float = 1.0

    def __post_init__(self):
        if not self.sigma_sq > 0:
            raise ParameterError(f"prior variance must be positive, got {self.sigma_sq!r}")

    @property
    def inv_sigma_sq(self) -> float:
        return 0.0 if math.isinf(self.sigma_sq) else 1.0 / self.sigma_sq

    @property
    def is_regularized(self) -> bool:
        return math.isfinite(self.sigma_sq)


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8
    max_iterations: int = 200
    linear_solver: str = "auto"  # auto | cholesky | cg
    verbose: bool = False
    track_iterates: bool = False

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ParameterError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.max_iterations < 1:
            raise ParameterError("max_iterations must be at least 1")
        if self.linear_solver not in ("auto", "cholesky", "cg"):
            raise ParameterError(f"unknown linear solver {self.linear_solver!r}")


@dataclass(frozen=True, eq=False)
class ScoreVector:
    """Dense per-alternative scores."""

    alternatives: AlternativeSet
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (len(self.alternatives),):
            raise MismatchError(
                f"expected {len(self.alternatives)} scores, got shape {values.shape}")
        values = values.copy()
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, alternatives: AlternativeSet) -> "ScoreVector":
        return cls(alternatives, np.zeros(len(alternatives)))

    def value_of(self, a: str) -> float:
        return float(self.values[self.alternatives.index_of(a)])

    def difference(self, a: str, b: str) -> float:
        return self.value_of(a) - self.value_of(b)

    def as_dict(self) -> dict[str, float]:
        return {a: float(v) for a, v in zip(self.alternatives.ids, self.values)}

    def __eq__(self, other):
        return (isinstance(other, ScoreVector)
                and self.alternatives == other.alternatives
                and np.array_equal(self.values, other.values))


@dataclass
class SolveReport:
    """Convergence record; ``certified_error = 2 sigma^2 ||grad||_2``."""

    iterations: int
    final_gradient_norm: float
    certified_error: float
    converged: bool
    objective: float
    iterates: list[np.ndarray] | None = None


def _theta_array(matrix: ComparisonMatrix, theta) -> np.ndarray:
    if isinstance(theta, ScoreVector):
        if theta.alternatives != matrix.alternatives:
            raise MismatchError("score vector is over a different alternative set")
        return np.asarray(theta.values, dtype=float)
    arr = np.asarray(theta, dtype=float)
    if arr.shape != (len(matrix.alternatives),):
        raise MismatchError(
            f"expected {len(matrix.alternatives)} scores, got shape {arr.shape}")
    return arr


def loss(law: RootLaw, prior: PriorConfig, matrix: ComparisonMatrix, theta) -> float:
    """Posterior loss at theta (up to the constant normalizer)."""
    t = _theta_array(matrix, theta)
    i, j, r = matrix.index_arrays
    diff = t[i] - t[j]
    quad = 0.5 * prior.inv_sigma_sq * float(t @ t)
    return quad + float(np.sum(law.cumulant(diff) - r * diff))


def gradient(law: RootLaw, prior: PriorConfig, matrix: ComparisonMatrix, theta) -> np.ndarray:
    """Component a: theta_a / sigma^2 + sum_b (Phi'(theta_ab) - r_ab)."""
    t = _theta_array(matrix, theta)
    i, j, r = matrix.index_arrays
    g = prior.inv_sigma_sq * t
    edge = law.cumulant_prime(t[i] - t[j]) - r
    np.add.at(g, i, edge)
    np.add.at(g, j, -edge)
    return g


def _hessian_weights(law, matrix, t):
    i, j, _ = matrix.index_arrays
    return i, j, law.cumulant_double_prime(t[i] - t[j])


def hessian(law: RootLaw, prior: PriorConfig, matrix: ComparisonMatrix, theta):
    """Sparse symmetric Hessian: 1/sigma^2 + sum_b Phi'' on the diagonal,
    -Phi'' on compared pairs. Strictly diagonally dominant for finite sigma^2."""
    t = _theta_array(matrix, theta)
    a = len(matrix.alternatives)
    i, j, w = _hessian_weights(law, matrix, t)
    diag = np.full(a, prior.inv_sigma_sq)
    np.add.at(diag, i, w)
    np.add.at(diag, j, w)
    rows = np.concatenate([np.arange(a), i, j])
    cols = np.concatenate([np.arange(a), j, i])
    vals = np.concatenate([diag, -w, -w])
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(a, a))


def _hessian_dense(law, prior, matrix, t):
    a = len(matrix.alternatives)
    i, j, w = _hessian_weights(law, matrix, t)
    h = np.zeros((a, a))
    np.add.at(h, (i, j), -w)
    np.add.at(h, (j, i), -w)
    diag = np.full(a, prior.inv_sigma_sq)
    np.add.at(diag, i, w)
    np.add.at(diag, j, w)
    h[np.arange(a), np.arange(a)] = diag
    return h


def connected_components(matrix: ComparisonMatrix) -> list[list[int]]:
    """Index groups of the comparison graph, largest first (ties by lowest index)."""
    a = len(matrix.alternatives)
    parent = list(range(a))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    i, j, _ = matrix.index_arrays
    for u, v in zip(i, j):
        ru, rv = find(int(u)), find(int(v))
        if ru != rv:
            parent[max(ru, rv)] = min(ru, rv)
    groups: dict[int, list[int]] = {}
    for x in range(a):
        groups.setdefault(find(x), []).append(x)
    return sorted(groups.values(), key=lambda g: (-len(g), g[0]))


def _solve_newton_system(law, prior, matrix, t, g, options):
    a = t.size
    use_dense = options.linear_solver == "cholesky" or (
        options.linear_solver == "auto" and a <= _DENSE_LIMIT)
    gauge = 0.0
    if not prior.is_regularized:
        # the likelihood Hessian annihilates constants; pin the gauge with a
        # rank-one term (the gradient is orthogonal to constants, so the
        # Newton step is unchanged on the zero-sum subspace)
        gauge = 1.0

    if use_dense:
        h = _hessian_dense(law, prior, matrix, t)
        if gauge:
            h += (h.diagonal().mean() / a) * np.ones((a, a))
        try:
            c, low = scipy.linalg.cho_factor(h, check_finite=False)
            return scipy.linalg.cho_solve((c, low), -g, check_finite=False)
        except scipy.linalg.LinAlgError as exc:
            raise SolverError(f"Cholesky factorization failed: {exc}") from exc

    h = hessian(law, prior, matrix, t)
    diag = h.diagonal()
    scale = diag.mean() / a
    if gauge:
        op = LinearOperator((a, a), matvec=lambda x: h @ x + scale * np.sum(x))
    else:
        op = h
    pre = LinearOperator((a, a), matvec=lambda x: x / diag)
    sol, info = sparse_cg(op, -g, rtol=1e-10, atol=0.0, M=pre, maxiter=50 * a)
    if info != 0:
        raise SolverError(f"conjugate gradient did not converge (info={info})")
    return sol


def map_estimate(law: RootLaw, prior: PriorConfig, matrix: ComparisonMatrix,
                 options: SolverOptions | None = None) -> tuple[ScoreVector, SolveReport]:
    """Minimize the posterior loss; returns the scores and a certified report.

    Deterministic in its inputs. Raises SolverError (carrying the partial
    report) on non-convergence within ``max_iterations`` or on NaN loss.
    """
    options = options or SolverOptions()
    if matrix.num_pairs < 1:
        raise ParameterError("cannot estimate scores from an empty comparison set")
    if not prior.is_regularized and len(connected_components(matrix)) > 1:
        raise SolverError("the unregularized variant requires a connected comparison graph")

    a = len(matrix.alternatives)
    t = np.zeros(a)
    current = loss(law, prior, matrix, t)
    trail: list[np.ndarray] | None = [] if options.track_iterates else None
    iterations = 0

    def certified(gn: float) -> float:
        return 2.0 * prior.sigma_sq * gn if prior.is_regularized else math.inf

    while True:
        g = gradient(law, prior, matrix, t)
        gn = float(np.linalg.norm(g))
        if trail is not None:
            trail.append(t.copy())
        err = certified(gn)
        done = err <= options.tolerance if prior.is_regularized else gn <= options.tolerance
        if options.verbose:
            print(f"iter {iterations:3d}  loss {current:.12g}  |grad| {gn:.3e}  bound {err:.3e}")
        if done:
            vec = ScoreVector(matrix.alternatives, t)
            return vec, SolveReport(iterations, gn, err, True, current, trail)
        if iterations >= options.max_iterations:
            report = SolveReport(iterations, gn, err, False, current, trail)
            raise SolverError(
                f"no convergence after {iterations} iterations "
                f"(gradient norm {gn:.3e})", report=report)

        step = _solve_newton_system(law, prior, matrix, t, g, options)
        descent = float(g @ step)
        if not descent < 0:
            report = SolveReport(iterations, gn, err, False, current, trail)
            raise SolverError("Newton direction is not a descent direction", report=report)

        # Armijo backtracking from the full step; once the predicted decrease
        # falls below the loss's floating-point resolution the test carries no
        # information, so the full Newton step is taken (the strongly convex
        # pure-Newton regime) and the gradient-norm stop takes over
        scale = 1.0
        while True:
            cand = t + scale * step
            if not prior.is_regularized:
                cand -= cand.mean()
            value = loss(law, prior, matrix, cand)
            if math.isnan(value):
                report = SolveReport(iterations, gn, err, False, current, trail)
                raise SolverError("loss evaluated to NaN", report=report)
            below_resolution = current + _ARMIJO_C * scale * descent == current
            if (below_resolution and np.isfinite(value)) or \
                    value <= current + _ARMIJO_C * scale * descent:
                break
            scale *= 0.5
            if scale < 1e-18:
                report = SolveReport(iterations, gn, err, False, current, trail)
                raise SolverError("line search failed to make progress", report=report)
        t, current = cand, value
        iterations += 1


def map_estimate_gaussian(sigma0_sq: float, prior: PriorConfig,
                          matrix: ComparisonMatrix) -> ScoreVector:
    """Closed-form scores for the Gaussian comparison model.

    Solves (D - sigma0^2 Adj) theta = rbar with D the diagonal
    1/sigma^2 + sigma0^2 * degree and rbar the oriented row sums. The system
    is strictly diagonally dominant, hence always solvable.
    """
    if not sigma0_sq > 0:
        raise ParameterError(f"sigma0_sq must be positive, got {sigma0_sq!r}")
    if not prior.is_regularized:
        raise ParameterError("the closed-form Gaussian path requires a finite prior variance")
    if matrix.num_pairs < 1:
        raise ParameterError("cannot estimate scores from an empty comparison set")
    a = len(matrix.alternatives)
    i, j, r = matrix.index_arrays
    rbar = np.zeros(a)
    np.add.at(rbar, i, r)
    np.add.at(rbar, j, -r)
    if a <= _DENSE_LIMIT:
        m = np.zeros((a, a))
        np.add.at(m, (i, j), -sigma0_sq)
        np.add.at(m, (j, i), -sigma0_sq)
        m[np.arange(a), np.arange(a)] = prior.inv_sigma_sq + sigma0_sq * matrix.degrees
        values = scipy.linalg.solve(m, rbar, assume_a="pos")
    else:
        diag = prior.inv_sigma_sq + sigma0_sq * matrix.degrees
        rows = np.concatenate([np.arange(a), i, j])
        cols = np.concatenate([np.arange(a), j, i])
        vals = np.concatenate([diag, np.full(i.size, -sigma0_sq), np.full(i.size, -sigma0_sq)])
        m = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(a, a))
        pre = LinearOperator((a, a), matvec=lambda x: x / diag)
        values, info = sparse_cg(m, rbar, rtol=1e-12, atol=0.0, M=pre, maxiter=100 * a)
        if info != 0:
            raise SolverError(f"conjugate gradient did not converge (info={info})")
    return ScoreVector(matrix.alternatives, values)
