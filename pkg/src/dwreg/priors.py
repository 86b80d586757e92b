"""Priors over the regression coefficients and the unnormalized log-posterior.

Two choices: an improper flat prior (the log prior is identically zero, so
the posterior is the likelihood), or independent Laplace priors on the
penalized coefficients with rates lambda (for theta) and tau (for gamma)
carrying Gamma(a, b) hyper-priors.  The Gamma is rate-parameterized: the
density is b^a x^(a-1) e^(-bx) / Gamma(a).  The hyper rates stay conjugate
even though the coefficients are not, so they admit exact Gibbs draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .regression import Dataset, ModelSpec, RegressionParams, log_likelihood

PRIOR_KINDS = ("flat", "laplace")


@dataclass(frozen=True)
class PriorSpec:
    kind: str = "flat"
    hyper_a: float = 2.0
    hyper_b: float = 1.0
    penalize_intercepts: bool = False

    def __post_init__(self):
        if self.kind not in PRIOR_KINDS:
            raise ValueError(f"kind must be one of {PRIOR_KINDS}, got {self.kind!r}")
        if self.kind == "laplace" and not (self.hyper_a > 0 and self.hyper_b > 0):
            raise ValueError("laplace prior requires hyper_a > 0 and hyper_b > 0")


@dataclass
class HyperState:
    """Current shrinkage rates: lam for the theta block, tau for gamma."""

    lam: float
    tau: float

    def __post_init__(self):
        if not (self.lam > 0 and self.tau > 0):
            raise ValueError("shrinkage rates must be strictly positive")


def penalized_coords(params: RegressionParams, penalize_intercepts: bool = False):
    """Shrinkage-subject coordinates of each block, inferred from lengths.

    An intercept-only vector (length 1) has no penalized coordinates unless
    intercepts are penalized explicitly.
    """
    def block(vec):
        pen = vec[1:] if vec.shape[0] > 1 else vec[:0]
        if penalize_intercepts:
            pen = vec
        return pen

    return block(params.theta), block(params.gamma)


def _laplace_block(coeffs: np.ndarray, rate: float) -> float:
    m = coeffs.shape[0]
    if m == 0:
        return 0.0
    return m * math.log(rate / 2.0) - rate * float(np.sum(np.abs(coeffs)))


def log_prior(params: RegressionParams, hyper: HyperState, spec: PriorSpec) -> float:
    """Log prior density of the coefficients (flat -> 0)."""
    if spec.kind == "flat":
        return 0.0
    th, ga = penalized_coords(params, spec.penalize_intercepts)
    return _laplace_block(th, hyper.lam) + _laplace_block(ga, hyper.tau)


def gamma_logpdf(x: float, a: float, b: float) -> float:
    """Log density of Gamma(shape=a, rate=b) at x > 0."""
    if x <= 0:
        return -math.inf
    return a * math.log(b) - float(gammaln(a)) + (a - 1.0) * math.log(x) - b * x


def log_posterior_unnorm(params: RegressionParams, hyper: HyperState | None,
                         data: Dataset, model_spec: ModelSpec,
                         prior_spec: PriorSpec) -> float:
    """Likelihood plus prior plus (laplace case) the hyper-prior terms."""
    ll = log_likelihood(data, params, model_spec)
    if prior_spec.kind == "flat":
        return ll
    if hyper is None:
        raise ValueError("laplace prior requires a HyperState")
    return (ll + log_prior(params, hyper, prior_spec)
            + gamma_logpdf(hyper.lam, prior_spec.hyper_a, prior_spec.hyper_b)
            + gamma_logpdf(hyper.tau, prior_spec.hyper_a, prior_spec.hyper_b))


def gibbs_update_rate(coeffs, a: float, b: float, rng: np.random.Generator) -> float:
    """Exact draw from the full conditional of a shrinkage rate.

    Under independent Laplace(rate) factors on m coefficients and a
    Gamma(a, b) prior on the rate, the full conditional is
    Gamma(a + m, b + sum |coeff|).
    """
    if not (a > 0 and b > 0):
        raise ValueError("hyper-prior parameters must be positive")
    coeffs = np.asarray(coeffs, dtype=float)
    shape = a + coeffs.shape[0]
    rate = b + float(np.sum(np.abs(coeffs)))
    return float(rng.gamma(shape, 1.0 / rate))
