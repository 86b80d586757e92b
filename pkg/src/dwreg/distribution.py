"""Type-I discrete Weibull distribution on the support {0, 1, 2, ...}.

The distribution is parameterized by ``0 < q < 1`` and a shape ``beta > 0``
with cdf ``F(y) = 1 - q^((y+1)^beta)``.  This module provides evaluation
(pmf, log-pmf, cdf), closed-form quantiles, inverse-transform sampling and
three single-sample estimators: the zeros/ones proportion estimator, its
all-observations refinement of the shape estimate, and full maximum
likelihood.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass

import numpy as np
from scipy import optimize
from scipy.special import expit

from .exceptions import DegenerateSampleError

_LN2 = math.log(2.0)

# Saturation bounds shared with the regression links: parameters produced
# from unconstrained coordinates are clamped here so log-densities stay
# finite during optimizer and sampler excursions.
Q_EPS = 1e-15
BETA_MIN = 1e-10
BETA_MAX = 1e10


@dataclass(frozen=True)
class DWParams:
    """Shape parameter pair (q, beta) of one discrete Weibull distribution."""

    q: float
    beta: float

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise ValueError(f"q must lie strictly in (0, 1), got {self.q}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class SampleCounts:
    """Counting summary of an observed sample of non-negative integers.

    ``zeros`` and ``ones`` are the number of observations equal to 0 and 1,
    ``max_value`` the sample maximum, and ``ecdf`` maps each observed value
    to the empirical cdf evaluated there.
    """

    n: int
    zeros: int
    ones: int
    max_value: int
    ecdf: dict[int, float]

    def ecdf_at(self, d: int) -> float:
        """Empirical cdf as a right-continuous step function at integer d."""
        keys = sorted(self.ecdf)
        i = bisect_right(keys, d) - 1
        return self.ecdf[keys[i]] if i >= 0 else 0.0


def log1mexp(x):
    """ln(1 - exp(-x)) for x > 0, two-branch form split at ln 2."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        small = np.log(-np.expm1(-x))
        large = np.log1p(-np.exp(-x))
    out = np.where(x <= _LN2, small, large)
    if out.ndim == 0:
        return float(out)
    return out


def pmf(y: int, params: DWParams) -> float:
    """P(Y = y) = q^(y^beta) - q^((y+1)^beta)."""
    if y < 0:
        raise ValueError(f"y must be a non-negative integer, got {y}")
    q, b = params.q, params.beta
    return max(0.0, q ** (float(y) ** b) - q ** (float(y + 1) ** b))


def cdf(y, params: DWParams) -> float:
    """P(Y <= y); zero below the support, 1 - q^((floor(y)+1)^beta) above."""
    if y < 0:
        return 0.0
    k = math.floor(y)
    return 1.0 - params.q ** (float(k + 1) ** params.beta)


def log_pmf(y: int, params: DWParams) -> float:
    """Numerically stable ln pmf(y).

    Uses ``y^beta * ln q + ln(1 - exp(delta * ln q))`` with
    ``delta = (y+1)^beta - y^beta`` evaluated in a cancellation-free form.
    """
    if y < 0:
        raise ValueError(f"y must be a non-negative integer, got {y}")
    q, b = params.q, params.beta
    lq = math.log(q)
    if y == 0:
        a, delta = 0.0, 1.0
    else:
        a = float(y) ** b
        # (y+1)^b - y^b = y^b * expm1(b * log1p(1/y)), accurate for large y
        delta = a * math.expm1(b * math.log1p(1.0 / y))
    return a * lq + log1mexp(-delta * lq)


def quantile(p: float, params: DWParams) -> int:
    """Smallest y with cdf(y) >= p, via the closed form plus one correction.

    The closed form ``ceil((ln(1-p)/ln q)^(1/beta) - 1)`` can land one step
    off at jump points because of floating-point rounding; the result is
    checked against the cdf and moved by at most one step.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"p must lie in [0, 1); the support is unbounded (got {p})")
    lq = math.log(params.q)
    r = max(math.log1p(-p) / lq, 0.0)
    y = max(math.ceil(r ** (1.0 / params.beta) - 1.0), 0)
    if cdf(y, params) < p:
        y += 1
    elif y > 0 and cdf(y - 1, params) >= p:
        y -= 1
    return y


def _cdf_arr(y, q, beta):
    return 1.0 - np.power(q, np.power(y + 1.0, beta))


def quantile_arr(u, q, beta):
    """Vectorized quantile; mirrors :func:`quantile` element-wise.

    ``u`` is an array of probabilities in [0, 1); ``q`` and ``beta`` scalars
    or arrays broadcastable against it (per-element parameters).
    """
    u = np.asarray(u, dtype=float)
    lq = np.log(q)
    r = np.maximum(np.log1p(-u) / lq, 0.0)
    y = np.maximum(np.ceil(np.power(r, 1.0 / np.asarray(beta, dtype=float)) - 1.0), 0.0)
    low = _cdf_arr(y, q, beta) < u
    y = y + low
    step_down = ~low & (y > 0) & (_cdf_arr(np.maximum(y - 1.0, 0.0), q, beta) >= u)
    y = y - step_down
    return y.astype(np.int64)


def sample(params: DWParams, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n values by inverse transform: one uniform consumed per draw."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    u = rng.random(n)
    return quantile_arr(u, params.q, params.beta)


def log_pmf_arr(y, q, beta):
    """Vectorized log pmf for integer array y and broadcastable q, beta.

    Same stabilized form as :func:`log_pmf`; inputs are assumed already
    clamped to the valid open domain.
    """
    y = np.asarray(y, dtype=float)
    q = np.asarray(q, dtype=float)
    beta = np.asarray(beta, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        lq = np.log(q)
        a = np.power(y, beta)
        y_safe = np.maximum(y, 1.0)
        delta = np.where(y == 0.0, 1.0, a * np.expm1(beta * np.log1p(1.0 / y_safe)))
        return a * lq + log1mexp(-delta * lq)


def trunc_mean(params: DWParams, tail: float = 1e-12) -> float:
    # E[Y] = sum_{y>=1} P(Y >= y) = sum_{y>=1} q^(y^beta).  Summed exactly up
    # to the (1 - tail) quantile; for extremely heavy tails the sum is
    # replaced by the continuous-Weibull integral Gamma(1+1/b)(-ln q)^(-1/b)
    # minus the half-cell correction.
    q, b = params.q, params.beta
    upper = quantile(1.0 - tail, params)
    if upper <= 2_000_000:
        total = 0.0
        lo = 1
        while lo <= upper:
            hi = min(lo + 1_000_000, upper)
            ys = np.arange(lo, hi + 1, dtype=float)
            total += float(np.sum(np.power(q, np.power(ys, b))))
            lo = hi + 1
        return total
    return math.gamma(1.0 + 1.0 / b) * (-math.log(q)) ** (-1.0 / b) - 0.5


def summarize_sample(values) -> SampleCounts:
    """Count zeros, ones, the maximum and the empirical cdf of a sample."""
    arr = np.asarray(values)
    if arr.size == 0:
        raise ValueError("sample is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(arr == np.floor(arr)):
            raise ValueError("sample values must be integers")
        arr = arr.astype(np.int64)
    if np.any(arr < 0):
        raise ValueError("sample values must be non-negative")
    n = int(arr.size)
    counts = np.bincount(arr)
    cum = np.cumsum(counts) / n
    ecdf = {int(v): float(cum[v]) for v in np.nonzero(counts)[0]}
    return SampleCounts(
        n=n,
        zeros=int(counts[0]) if counts.size > 0 else 0,
        ones=int(counts[1]) if counts.size > 1 else 0,
        max_value=int(arr.max()),
        ecdf=ecdf,
    )


def estimate_proportions(sc: SampleCounts) -> DWParams:
    """Closed-form estimator from the sample proportions of zeros and ones.

    ``q = 1 - Z/n`` and ``beta = ln[ln(1 - Z/n - U/n) / ln(1 - Z/n)] / ln 2``
    where Z and U count the zeros and ones.  Undefined when the sample has
    no zeros (q estimate degenerates to 1), only zeros (q estimate 0), no
    ones, or nothing beyond zeros and ones.
    """
    n, z, u = sc.n, sc.zeros, sc.ones
    if z == 0 or z == n:
        raise DegenerateSampleError(
            f"q degenerate: estimate would be {1.0 - z / n:g} with Z={z}, n={n}"
        )
    if z + u == n:
        raise DegenerateSampleError("beta undefined: sample has no values above 1")
    if u == 0:
        raise DegenerateSampleError("beta undefined: sample has no ones")
    q = 1.0 - z / n
    beta = math.log(math.log(1.0 - z / n - u / n) / math.log(1.0 - z / n)) / _LN2
    return DWParams(q=q, beta=beta)


def estimate_santos_beta(sc: SampleCounts, q_hat: float) -> float:
    """Shape estimate averaging ecdf information over d = 1 .. max-1.

    ``beta = (1/k) sum_d ln[ln(1 - F(d)) / ln(q_hat)] / ln(d+1)`` with
    ``k = max_value - 1``.  Terms where the empirical cdf is 0 or 1 (the
    log ratio leaves (0, inf)) are dropped and the average taken over the
    remaining terms.  At ``max_value = 2`` this reduces to the proportions
    estimate of beta.
    """
    if not 0.0 < q_hat < 1.0:
        raise ValueError(f"q_hat must lie strictly in (0, 1), got {q_hat}")
    if sc.max_value < 2:
        raise DegenerateSampleError(
            f"insufficient range: max observed value is {sc.max_value}, need >= 2"
        )
    lq = math.log(q_hat)
    terms = []
    for d in range(1, sc.max_value):
        f = sc.ecdf_at(d)
        if f >= 1.0:
            continue
        ratio = math.log(1.0 - f) / lq
        if ratio <= 0.0:
            continue
        terms.append(math.log(ratio) / math.log(d + 1.0))
    if not terms:
        raise DegenerateSampleError("insufficient range: no usable ecdf terms")
    return sum(terms) / len(terms)


def _clamp_q(q: float) -> float:
    return min(max(q, Q_EPS), 1.0 - Q_EPS)


def _clamp_beta(b: float) -> float:
    return min(max(b, BETA_MIN), BETA_MAX)


def mle_single(values, tol: float = 1e-8, max_evals: int = 2000):
    """Maximum-likelihood fit of (q, beta) to a plain sample.

    Runs a Nelder-Mead simplex in unconstrained coordinates (logit q,
    log beta), started from the proportions estimate when it exists.
    Returns ``(DWParams, attained log-likelihood)``.
    """
    arr = np.asarray(values, dtype=np.int64)
    if arr.size == 0:
        raise ValueError("sample is empty")
    if np.all(arr == arr[0]):
        raise DegenerateSampleError("degenerate sample: all values equal")
    sc = summarize_sample(arr)
    try:
        start = estimate_proportions(sc)
        q0, b0 = start.q, start.beta
    except DegenerateSampleError:
        q0 = min(max(1.0 - sc.zeros / sc.n, 0.05), 0.95)
        b0 = 1.0
    x0 = np.array([math.log(q0 / (1.0 - q0)), math.log(b0)])

    def negloglik(x):
        q = _clamp_q(float(expit(x[0])))
        b = _clamp_beta(math.exp(min(x[1], 700.0)))
        return -float(np.sum(log_pmf_arr(arr, q, b)))

    res = optimize.minimize(
        negloglik,
        x0,
        method="Nelder-Mead",
        options={"fatol": tol, "xatol": 1e-8, "maxfev": max_evals},
    )
    q = _clamp_q(float(expit(res.x[0])))
    b = _clamp_beta(math.exp(res.x[1]))
    return DWParams(q=q, beta=b), -float(res.fun)
