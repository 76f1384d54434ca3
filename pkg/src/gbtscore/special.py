"""Numerically stable hyperbolic helpers.

The cumulant functions of the bounded comparison models reduce to a handful
of scalar functions (log(sinh x / x), the Langevin function, their
derivatives) that are 0/0 at the origin and overflow-prone for large
arguments. Each helper here evaluates a truncated Taylor series near zero,
the direct formula in the midrange, and an asymptotic form where the direct
formula would overflow. All accept scalars or ndarrays elementwise.
"""

from __future__ import annotations

import numpy as np

_LOG2 = float(np.log(2.0))


def _dispatch(x, pieces):
    """Evaluate (mask_fn, value_fn) pieces on |x| and reassemble.

    ``pieces`` are tried in order on the absolute value; the first matching
    mask wins. Returns an array shaped like x (caller unwraps scalars).
    """
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(ax)
    remaining = np.ones(ax.shape, dtype=bool)
    for mask_fn, value_fn in pieces:
        m = remaining & mask_fn(ax)
        if np.any(m):
            out[m] = value_fn(ax[m])
        remaining &= ~m
    return out


def _unwrap(x, out):
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(out)
    return out


def log_cosh(x):
    """log(cosh x), exact at 0 and overflow-free: logaddexp(x, -x) - log 2."""
    return np.logaddexp(x, -x) - _LOG2


def sech_sq(x):
    """1 / cosh(x)^2 without overflow; underflows to 0 beyond |x| ~ 354."""
    u = np.exp(-np.abs(x))
    s = 2.0 * u / (1.0 + u * u)
    return s * s


def csch_sq(x):
    """1 / sinh(x)^2 for |x| bounded away from 0 (callers guard the origin)."""
    ax = np.abs(x)
    e = np.expm1(-2.0 * ax)
    return 4.0 * np.exp(-2.0 * ax) / (e * e)


def log_sinhc(x):
    """log(sinh x / x); even, equals 0 at the origin.

    Series below 0.5, direct formula to 30, then the asymptotic form
    |x| - log(2|x|) + log1p(-exp(-2|x|)) which never overflows.
    """

    def series(a):
        p = a * a
        # sinh(x)/x - 1 = x^2/3! + x^4/5! + ...  (through x^14, exact at 0.5)
        s = p * (1 / 6 + p * (1 / 120 + p * (1 / 5040 + p * (1 / 362880
            + p * (1 / 39916800 + p * (1 / 6227020800 + p / 1307674368000))))))
        return np.log1p(s)

    out = _dispatch(x, [
        (lambda a: a < 0.5, series),
        (lambda a: a < 30.0, lambda a: np.log(np.sinh(a) / a)),
        (lambda a: np.isfinite(a), lambda a: a - np.log(2.0 * a) + np.log1p(-np.exp(-2.0 * a))),
        (lambda a: ~np.isfinite(a), lambda a: a),
    ])
    return _unwrap(x, out)


def langevin(x):
    """coth(x) - 1/x; odd, strictly increasing, image (-1, 1)."""
    xs = np.asarray(x, dtype=float)

    def series(a):
        p = a * a
        return a * (1 / 3 + p * (-1 / 45 + p * (2 / 945 + p * (-1 / 4725 + p * (2 / 93555)))))

    out = _dispatch(x, [
        (lambda a: a < 0.2, series),
        (lambda a: np.isfinite(a), lambda a: 1.0 / np.tanh(a) - 1.0 / a),
        (lambda a: ~np.isfinite(a), lambda a: np.ones_like(a)),
    ])
    out = out * np.sign(xs)
    return _unwrap(x, out)


def langevin_deriv(x):
    """d/dx (coth x - 1/x) = 1/x^2 - csch(x)^2; even, 1/3 at the origin."""

    def series(a):
        p = a * a
        return 1 / 3 + p * (-1 / 15 + p * (2 / 189 + p * (-1 / 675 + p * (2 / 10395))))

    out = _dispatch(x, [
        (lambda a: a < 0.2, series),
        (lambda a: np.isfinite(a), lambda a: 1.0 / (a * a) - csch_sq(a)),
        (lambda a: ~np.isfinite(a), lambda a: np.zeros_like(a)),
    ])
    return _unwrap(x, out)
