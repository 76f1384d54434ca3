"""Comparison-model catalog.

A :class:`RootLaw` describes how two equally scored alternatives are
compared: a symmetric probability law on the comparison value. Tilting that
law by ``exp(theta * r)`` with the score difference ``theta`` gives the
conditional law of a comparison, and everything downstream (likelihoods,
gradients, expected comparisons) is driven by the law's cumulant generating
function ``Phi(theta) = log E[exp(theta * r)]`` and its first two
derivatives, which equal the tilted mean and tilted variance.

Catalog:

========== =========== ============= =================================
family      support     parameter     Phi(theta)
========== =========== ============= =================================
bernoulli   {-1, +1}    none          log cosh(theta)
knary       K grid pts  K >= 2        log(sinh(Kt/(K-1)) / (K sinh(t/(K-1))))
poisson     integers    lambda > 0    logaddexp(l e^t, l e^-t) - log 2 - l
gaussian    reals       sigma0^2 > 0  sigma0^2 theta^2 / 2
uniform     [-1, 1]     none          log(sinh(theta)/theta)
beta        [-1, 1]     beta > 0      numeric (Gauss-Jacobi quadrature)
beta2       [-1, 1]     none          log(3 (t cosh t - sinh t) / t^3)
========== =========== ============= =================================

All laws are even, so Phi is even, Phi' odd, Phi'' even and positive; the
implementation reduces every evaluation to theta >= 0 to make those
symmetries exact in floating point.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit, gammaln, roots_jacobi

from .errors import ParameterError
from .special import langevin, langevin_deriv, log_cosh, log_sinhc, sech_sq

__all__ = ["Family", "RootLaw", "parse_model_spec", "poisson_cosh_cumulant"]

_LOG2 = float(np.log(2.0))


class Family(enum.Enum):
    BERNOULLI = "bernoulli"
    KNARY = "knary"
    POISSON = "poisson"
    GAUSSIAN = "gaussian"
    UNIFORM = "uniform"
    BETA = "beta"
    BETA_TWO = "beta2"


# coefficients of 3 (t cosh t - sinh t) / t^3 = sum c_m t^(2m); c_m = 3(2m+2)/(2m+3)!
_BETA2_COEF = np.array([3.0 * (2 * m + 2) / math.factorial(2 * m + 3) for m in range(10)])


@lru_cache(maxsize=32)
def _jacobi_rule(beta: float, n: int):
    """Gauss-Jacobi nodes/weights for the weight (1-x^2)^(beta-1) on [-1, 1]."""
    x, w = roots_jacobi(n, beta - 1.0, beta - 1.0)
    return x, w, float(w.sum())


def _beta_rule_size(theta_max: float) -> int:
    # node count grows with the tilt so the integrand's boundary layer stays resolved
    return 80 + 2 * int(min(theta_max, 400.0))


@dataclass(frozen=True)
class RootLaw:
    """Immutable comparison-model descriptor; safe to share across threads."""

    family: Family
    k: int | None = None
    lam: float | None = None
    sigma0_sq: float | None = None
    beta: float | None = None

    def __post_init__(self):
        fam = self.family
        if fam == Family.KNARY:
            if not isinstance(self.k, int) or isinstance(self.k, bool) or self.k < 2:
                raise ParameterError(f"knary requires integer K >= 2, got {self.k!r}")
        elif fam == Family.POISSON:
            if self.lam is None or not self.lam > 0:
                raise ParameterError(f"poisson requires lambda > 0, got {self.lam!r}")
        elif fam == Family.GAUSSIAN:
            if self.sigma0_sq is None or not self.sigma0_sq > 0:
                raise ParameterError(f"gaussian requires sigma0sq > 0, got {self.sigma0_sq!r}")
        elif fam == Family.BETA:
            if self.beta is None or not self.beta > 0:
                raise ParameterError(f"beta requires beta > 0, got {self.beta!r}")

    # ---------------------------------------------------------------- factories

    @classmethod
    def bernoulli(cls) -> "RootLaw":
        return cls(Family.BERNOULLI)

    @classmethod
    def knary(cls, k: int) -> "RootLaw":
        return cls(Family.KNARY, k=k)

    @classmethod
    def poisson(cls, lam: float) -> "RootLaw":
        return cls(Family.POISSON, lam=float(lam) if lam is not None else None)

    @classmethod
    def gaussian(cls, sigma0_sq: float) -> "RootLaw":
        return cls(Family.GAUSSIAN, sigma0_sq=float(sigma0_sq) if sigma0_sq is not None else None)

    @classmethod
    def uniform(cls) -> "RootLaw":
        return cls(Family.UNIFORM)

    @classmethod
    def beta_law(cls, beta: float) -> "RootLaw":
        return cls(Family.BETA, beta=float(beta) if beta is not None else None)

    @classmethod
    def beta_two(cls) -> "RootLaw":
        return cls(Family.BETA_TWO)

    # ---------------------------------------------------------------- descriptors

    @property
    def r_max(self) -> float:
        """Supremum of the support: 1 for the bounded families, inf otherwise."""
        if self.family in (Family.POISSON, Family.GAUSSIAN):
            return math.inf
        return 1.0

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.r_max)

    @property
    def support_kind(self) -> str:
        if self.family in (Family.BERNOULLI, Family.KNARY, Family.POISSON):
            return "discrete"
        return "continuous"

    @property
    def spec_string(self) -> str:
        """Canonical model-spec string, parseable by :func:`parse_model_spec`."""
        fam = self.family
        if fam == Family.KNARY:
            return f"knary:K={self.k}"
        if fam == Family.POISSON:
            return f"poisson:lambda={self.lam}"
        if fam == Family.GAUSSIAN:
            return f"gaussian:sigma0sq={self.sigma0_sq}"
        if fam == Family.BETA:
            return f"beta:beta={self.beta}"
        return fam.value

    def support_points(self, tail_mass: float = 1e-12) -> np.ndarray | None:
        """Support grid for discrete families, None for continuous ones.

        For the Poisson family the grid is a symmetric truncation of the
        integers carrying at least ``1 - tail_mass`` of the untilted mass.
        """
        fam = self.family
        if fam == Family.BERNOULLI:
            return np.array([-1.0, 1.0])
        if fam == Family.KNARY:
            return 2.0 * np.arange(self.k) / (self.k - 1) - 1.0
        if fam == Family.POISSON:
            # mass outside [-n, n] equals the upper one-sided tail beyond n,
            # so scan the one-sided cumulative sum up to 1 - tail_mass
            lam = self.lam
            target = 1.0 - tail_mass
            log_term = -lam
            cum = math.exp(log_term)
            n = 0
            while cum < target and n < 10_000_000:
                n += 1
                log_term += math.log(lam) - math.log(n)
                cum += math.exp(log_term)
            return np.arange(-n, n + 1, dtype=float)
        return None

    def contains(self, r: float) -> bool:
        """Whether r lies in the support closure (interval for bounded laws)."""
        if not np.isfinite(r):
            return False
        if self.is_bounded:
            return abs(r) <= 1.0
        if self.family == Family.POISSON:
            return abs(r - round(r)) <= 1e-9
        return True

    # ---------------------------------------------------------------- cumulants

    def cumulant(self, theta):
        """Phi(theta); Phi(0) = 0 exactly, even, nonnegative, strictly convex."""
        a, _, scalar = self._split(theta)
        return _wrap(self._phi(a), scalar)

    def cumulant_prime(self, theta):
        """Phi'(theta): the tilted-law mean; odd, strictly increasing."""
        a, s, scalar = self._split(theta)
        return _wrap(s * self._phi_prime(a), scalar)

    def cumulant_double_prime(self, theta):
        """Phi''(theta): the tilted-law variance; even, strictly positive."""
        a, _, scalar = self._split(theta)
        return _wrap(self._phi_double_prime(a), scalar)

    @staticmethod
    def _split(theta):
        arr = np.asarray(theta, dtype=float)
        scalar = arr.ndim == 0
        arr = np.atleast_1d(arr)
        return np.abs(arr), np.sign(arr), scalar and arr.shape == (1,)

    def _phi(self, a):
        fam = self.family
        if fam == Family.BERNOULLI:
            return log_cosh(a)
        if fam == Family.KNARY:
            km1 = self.k - 1
            return log_sinhc(self.k * a / km1) - log_sinhc(a / km1)
        if fam == Family.POISSON:
            lam = self.lam
            return np.logaddexp(lam * np.exp(a), lam * np.exp(-a)) - _LOG2 - lam
        if fam == Family.GAUSSIAN:
            return 0.5 * self.sigma0_sq * a * a
        if fam == Family.UNIFORM:
            return log_sinhc(a)
        if fam == Family.BETA:
            return self._beta_moments(a)[0]
        return self._beta2(a)[0]

    def _phi_prime(self, a):
        fam = self.family
        if fam == Family.BERNOULLI:
            return np.tanh(a)
        if fam == Family.KNARY:
            k, km1 = self.k, self.k - 1
            return (k * langevin(k * a / km1) - langevin(a / km1)) / km1
        if fam == Family.POISSON:
            p = self.lam * np.exp(a)
            q = self.lam * np.exp(-a)
            w = expit(p - q)
            return w * p - (1.0 - w) * q
        if fam == Family.GAUSSIAN:
            return self.sigma0_sq * a
        if fam == Family.UNIFORM:
            return langevin(a)
        if fam == Family.BETA:
            return self._beta_moments(a)[1]
        return self._beta2(a)[1]

    def _phi_double_prime(self, a):
        fam = self.family
        if fam == Family.BERNOULLI:
            return sech_sq(a)
        if fam == Family.KNARY:
            k, km1 = self.k, self.k - 1
            return (k * k * langevin_deriv(k * a / km1) - langevin_deriv(a / km1)) / (km1 * km1)
        if fam == Family.POISSON:
            p = self.lam * np.exp(a)
            q = self.lam * np.exp(-a)
            w = expit(p - q)
            spread = w * (1.0 - w)
            quad = np.where(spread > 0.0, spread * (p + q) * (p + q), 0.0)
            return w * p + (1.0 - w) * q + quad
        if fam == Family.GAUSSIAN:
            return np.full_like(a, self.sigma0_sq)
        if fam == Family.UNIFORM:
            return langevin_deriv(a)
        if fam == Family.BETA:
            return self._beta_moments(a)[2]
        return self._beta2(a)[2]

    def _beta_moments(self, a):
        """(Phi, Phi', Phi'') from tilted Gauss-Jacobi moments, theta >= 0."""
        n = _beta_rule_size(float(a.max()) if a.size else 0.0)
        x, w, wsum = _jacobi_rule(self.beta, n)
        expo = np.exp(a[:, None] * (x[None, :] - 1.0))  # exponent <= 0: no overflow
        z = expo @ w
        m1 = (expo @ (w * x)) / z
        m2 = (expo @ (w * x * x)) / z
        phi = np.log(z) + a - math.log(wsum)
        return phi, m1, m2 - m1 * m1

    @staticmethod
    def _beta2(a):
        """(Phi, Phi', Phi'') for the quadratic-weight law, theta >= 0.

        Series below 1, hyperbolic formulas to 500, then an asymptotic tail
        (the hyperbolic path would overflow past ~709).
        """
        phi = np.empty_like(a)
        phip = np.empty_like(a)
        phipp = np.empty_like(a)

        m = a < 1.0
        if np.any(m):
            p = a[m] * a[m]
            g = np.zeros_like(p)
            gp = np.zeros_like(p)   # g'(t) / t
            gpp = np.zeros_like(p)
            for i in range(len(_BETA2_COEF) - 1, -1, -1):
                c = _BETA2_COEF[i]
                g = g * p + c
                if i >= 1:
                    gp = gp * p + 2 * i * c
                    gpp = gpp * p + 2 * i * (2 * i - 1) * c
            t = a[m]
            ratio = t * gp / g
            phi[m] = np.log(g)
            phip[m] = ratio
            phipp[m] = gpp / g - ratio * ratio

        m = (a >= 1.0) & (a <= 500.0)
        if np.any(m):
            t = a[m]
            d = t * np.cosh(t) - np.sinh(t)
            r1 = t * np.sinh(t) / d
            phi[m] = np.log(3.0 * d / (t ** 3))
            phip[m] = r1 - 3.0 / t
            phipp[m] = (np.sinh(t) + t * np.cosh(t)) / d - r1 * r1 + 3.0 / (t * t)

        m = a > 500.0
        if np.any(m):
            t = a[m]
            phi[m] = t + math.log(1.5) + np.log(t - 1.0) - 3.0 * np.log(t)
            phip[m] = 1.0 + 1.0 / (t - 1.0) - 3.0 / t
            phipp[m] = 3.0 / (t * t) - 1.0 / ((t - 1.0) ** 2)

        return phi, phip, phipp

    # ---------------------------------------------------------------- sampling

    def sample_comparison(self, theta, rng, size: int | None = None):
        """Draw from the tilted comparison law at score difference theta.

        ``theta`` scalar with ``size=None`` returns a float; ``size=n``
        returns n i.i.d. draws; an array ``theta`` (size must be None)
        returns one draw per entry. The random source is supplied by the
        caller so parallel reproducibility stays in the caller's hands.
        """
        arr = np.asarray(theta, dtype=float)
        if arr.ndim == 0:
            th = np.full(1 if size is None else int(size), float(arr))
            out = self._sample(th, rng)
            return float(out[0]) if size is None else out
        if size is not None:
            raise ParameterError("size is only valid with a scalar theta")
        return self._sample(arr.ravel(), rng).reshape(arr.shape)

    def _sample(self, th, rng):
        fam = self.family
        n = th.size
        if fam == Family.BERNOULLI:
            return np.where(rng.random(n) < expit(2.0 * th), 1.0, -1.0)
        if fam == Family.KNARY:
            pts = self.support_points()
            return _grid_sample(pts, np.zeros_like(pts), th, rng)
        if fam == Family.POISSON:
            pts, logw = self._poisson_log_weights(float(np.abs(th).max()))
            return _grid_sample(pts, logw, th, rng)
        if fam == Family.GAUSSIAN:
            return rng.normal(self.sigma0_sq * th, math.sqrt(self.sigma0_sq), size=n)
        if fam == Family.UNIFORM:
            return _uniform_tilted_sample(th, rng)
        b = 2.0 if fam == Family.BETA_TWO else self.beta
        return _beta_rejection_sample(b, th, rng)

    def _poisson_log_weights(self, theta_max: float):
        """Symmetric integer grid and untilted log-weights wide enough that
        the tilted law at |theta| <= theta_max keeps < 1e-12 mass outside."""
        lam = self.lam
        mode = lam * math.exp(theta_max)
        if not mode < 1e7:
            raise ParameterError(
                f"tilt {theta_max:g} too large for exact integer-grid sampling (lambda={lam:g})")
        n = int(math.ceil(mode + 12.0 * math.sqrt(mode) + 25.0))
        k = np.arange(-n, n + 1, dtype=float)
        ak = np.abs(k)
        logw = -lam + ak * math.log(lam) - gammaln(ak + 1.0) - np.where(k != 0, _LOG2, 0.0)
        return k, logw


def _wrap(values, scalar):
    return float(values[0]) if scalar else values


def _grid_sample(pts, logw, th, rng):
    n = th.size
    if n > 1 and np.all(th == th[0]):
        # shared tilt: one pmf, many draws
        logits = logw + th[0] * pts
        logits -= logits.max()
        cdf = np.cumsum(np.exp(logits))
        u = rng.random(n) * cdf[-1]
        idx = np.searchsorted(cdf, u, side="left")
    else:
        logits = logw[None, :] + th[:, None] * pts[None, :]
        logits -= logits.max(axis=1, keepdims=True)
        cdf = np.cumsum(np.exp(logits), axis=1)
        u = rng.random(n) * cdf[:, -1]
        idx = (cdf < u[:, None]).sum(axis=1)
    return pts[np.minimum(idx, pts.size - 1)]


def _uniform_tilted_sample(th, rng):
    # exact inverse CDF of exp(theta r) on [-1, 1], reduced to theta >= 0
    u = rng.random(th.size)
    a = np.abs(th)
    s = np.where(th < 0, -1.0, 1.0)
    out = np.empty_like(a)
    tiny = a < 1e-8
    out[tiny] = 2.0 * u[tiny] - 1.0
    big = ~tiny
    ab, ub = a[big], u[big]
    out[big] = 1.0 + np.log(ub + (1.0 - ub) * np.exp(-2.0 * ab)) / ab
    return s * out


def _beta_rejection_sample(beta, th, rng):
    # propose from the untilted law, accept with exp(theta (r - sign)) <= 1
    out = np.empty_like(th)
    pending = np.arange(th.size)
    while pending.size:
        t = th[pending]
        r = 2.0 * rng.beta(beta, beta, size=pending.size) - 1.0
        accept = np.log(rng.random(pending.size)) < t * r - np.abs(t)
        out[pending[accept]] = r[accept]
        pending = pending[~accept]
    return out


def poisson_cosh_cumulant(lam: float, theta):
    """Alternative constant-shifted integer-comparison cumulant lam*(cosh t - 1).

    Kept for comparison only: it is what one gets by averaging the two
    one-sided cumulant functions instead of the moment generating functions,
    and it does not match the symmetrized probability mass function that the
    samplers and likelihoods here are built on. :meth:`RootLaw.cumulant` is
    the consistent form.
    """
    return lam * (np.cosh(theta) - 1.0)


_FAMILY_PARAMS = {
    "bernoulli": (),
    "knary": ("k",),
    "poisson": ("lambda",),
    "gaussian": ("sigma0sq",),
    "uniform": (),
    "beta": ("beta",),
    "beta2": (),
}


def parse_model_spec(text: str) -> RootLaw:
    """Parse a model-spec string like ``knary:K=21`` or ``gaussian:sigma0sq=1.0``.

    Family names and parameter keys are case-insensitive; unknown families,
    unknown keys, missing or malformed parameters raise ParameterError.
    """
    if not isinstance(text, str) or not text.strip():
        raise ParameterError(f"empty model spec {text!r}")
    head, _, tail = text.strip().partition(":")
    name = head.strip().lower()
    if name not in _FAMILY_PARAMS:
        raise ParameterError(f"unknown model family {head.strip()!r}")
    wanted = _FAMILY_PARAMS[name]
    params: dict[str, str] = {}
    if tail.strip():
        for item in tail.split(","):
            key, eq, value = item.partition("=")
            key = key.strip().lower()
            if not eq or not key:
                raise ParameterError(f"malformed parameter {item.strip()!r} in {text!r}")
            if key not in wanted:
                raise ParameterError(f"unknown parameter {key!r} for model {name!r}")
            if key in params:
                raise ParameterError(f"duplicate parameter {key!r} in {text!r}")
            params[key] = value.strip()
    missing = [k for k in wanted if k not in params]
    if missing:
        raise ParameterError(f"model {name!r} requires parameter {missing[0]!r}")

    def as_float(key):
        try:
            return float(params[key])
        except ValueError:
            raise ParameterError(f"parameter {key!r} must be a number, got {params[key]!r}") from None

    if name == "bernoulli":
        return RootLaw.bernoulli()
    if name == "knary":
        raw = params["k"]
        try:
            k = int(raw)
        except ValueError:
            raise ParameterError(f"parameter 'K' must be an integer, got {raw!r}") from None
        return RootLaw.knary(k)
    if name == "poisson":
        return RootLaw.poisson(as_float("lambda"))
    if name == "gaussian":
        return RootLaw.gaussian(as_float("sigma0sq"))
    if name == "uniform":
        return RootLaw.uniform()
    if name == "beta":
        return RootLaw.beta_law(as_float("beta"))
    return RootLaw.beta_two()
