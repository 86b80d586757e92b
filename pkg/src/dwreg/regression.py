"""Count regression through the discrete Weibull distribution.

Both shape parameters can be linked to covariates: q through a logit or a
log(-log) link, beta through a log link.  Alongside the conditional
likelihood and its derivative-free maximization, the module carries
frequentist Poisson and negative-binomial baselines used for model
comparison.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import expit, gammaln

from . import distribution as dw
from .distribution import BETA_MAX, BETA_MIN, DWParams, Q_EPS
from .exceptions import NumericalError

LINKS = ("logit", "loglog")


@dataclass
class Dataset:
    """Response counts plus a design matrix with a leading intercept column."""

    y: np.ndarray
    X: np.ndarray
    names: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.y = np.asarray(self.y)
        if not np.issubdtype(self.y.dtype, np.integer):
            if not np.all(self.y == np.floor(self.y)):
                raise ValueError("responses must be integers")
            self.y = self.y.astype(np.int64)
        if np.any(self.y < 0):
            raise ValueError("responses must be non-negative")
        self.X = np.asarray(self.X, dtype=float)
        if self.X.ndim != 2:
            raise ValueError("X must be a 2-d matrix")
        if self.X.shape[0] != self.y.shape[0]:
            raise ValueError(
                f"X has {self.X.shape[0]} rows but y has {self.y.shape[0]} entries")
        if not np.all(self.X[:, 0] == 1.0):
            raise ValueError("first column of X must be the intercept (all ones)")
        if not self.names:
            self.names = [f"x{j}" for j in range(1, self.X.shape[1])]
        if len(self.names) != self.X.shape[1] - 1:
            raise ValueError("names must label the covariate columns (excluding intercept)")

    @property
    def n(self) -> int:
        return int(self.y.shape[0])

    @property
    def p(self) -> int:
        return int(self.X.shape[1] - 1)


@dataclass(frozen=True)
class ModelSpec:
    """Which link maps q, and which of q / beta depend on the covariates."""

    q_link: str = "logit"
    q_regressed: bool = True
    beta_regressed: bool = False

    def __post_init__(self):
        if self.q_link not in LINKS:
            raise ValueError(f"q_link must be one of {LINKS}, got {self.q_link!r}")

    def label(self) -> str:
        qpart = "regQ" if self.q_regressed else "q"
        bpart = "regBeta" if self.beta_regressed else "beta"
        return f"{self.q_link}:dw({qpart},{bpart})"


@dataclass
class RegressionParams:
    """Coefficient vectors for q (theta) and beta (gamma).

    A parameter that is not regressed keeps an intercept-only vector of
    length 1.
    """

    theta: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        self.gamma = np.atleast_1d(np.asarray(self.gamma, dtype=float))


def q_from_linpred(eta, link: str):
    """Map a linear predictor to q in (0,1); saturates instead of hitting 0/1."""
    if link == "logit":
        q = expit(eta)
    elif link == "loglog":
        q = np.exp(-np.exp(np.clip(eta, -700.0, 700.0)))
    else:
        raise ValueError(f"unknown link {link!r}")
    return np.clip(q, Q_EPS, 1.0 - Q_EPS)


def inverse_q_link(q: float, link: str) -> float:
    if link == "logit":
        return math.log(q / (1.0 - q))
    if link == "loglog":
        return math.log(-math.log(q))
    raise ValueError(f"unknown link {link!r}")


def beta_from_linpred(eta):
    """Map a linear predictor to beta = exp(eta), clamped to a finite range."""
    return np.clip(np.exp(np.clip(eta, -700.0, 700.0)), BETA_MIN, BETA_MAX)


@dataclass(frozen=True)
class ParamLayout:
    """Packing of the free coefficients of a model into one flat vector.

    Order: the theta block first (length p+1 if q is regressed, else 1),
    then the gamma block.
    """

    spec: ModelSpec
    p: int

    @property
    def theta_len(self) -> int:
        return self.p + 1 if self.spec.q_regressed else 1

    @property
    def gamma_len(self) -> int:
        return self.p + 1 if self.spec.beta_regressed else 1

    @property
    def dim(self) -> int:
        return self.theta_len + self.gamma_len

    @property
    def names(self) -> list[str]:
        return [f"theta_{j}" for j in range(self.theta_len)] + [
            f"gamma_{k}" for k in range(self.gamma_len)]

    def split(self, vec) -> RegressionParams:
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got {vec.shape}")
        return RegressionParams(theta=vec[: self.theta_len].copy(),
                                gamma=vec[self.theta_len:].copy())

    def join(self, params: RegressionParams) -> np.ndarray:
        if params.theta.shape != (self.theta_len,) or params.gamma.shape != (self.gamma_len,):
            raise ValueError("parameter vector lengths do not match the model layout")
        return np.concatenate([params.theta, params.gamma])

    def penalized_indices(self, penalize_intercepts: bool = False) -> np.ndarray:
        """Flat-vector indices subject to shrinkage (slopes; optionally intercepts)."""
        idx = []
        if self.spec.q_regressed:
            idx.extend(range(1, self.theta_len))
        if self.spec.beta_regressed:
            idx.extend(range(self.theta_len + 1, self.dim))
        if penalize_intercepts:
            idx = [0, self.theta_len] + idx
        return np.asarray(sorted(idx), dtype=np.intp)


def conditional_params(x_row, params: RegressionParams, spec: ModelSpec) -> DWParams:
    """Apply the configured links at a single covariate row."""
    x_row = np.asarray(x_row, dtype=float)
    if spec.q_regressed:
        if x_row.shape != params.theta.shape:
            raise ValueError("x_row and theta have incompatible lengths")
        eta_q = float(x_row @ params.theta)
    else:
        eta_q = float(params.theta[0])
    if spec.beta_regressed:
        if x_row.shape != params.gamma.shape:
            raise ValueError("x_row and gamma have incompatible lengths")
        eta_b = float(x_row @ params.gamma)
    else:
        eta_b = float(params.gamma[0])
    return DWParams(q=float(q_from_linpred(eta_q, spec.q_link)),
                    beta=float(beta_from_linpred(eta_b)))


def conditional_arrays(X, params: RegressionParams, spec: ModelSpec):
    """Vectors (q_i, beta_i) for every row of the design matrix."""
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    if spec.q_regressed:
        if X.shape[1] != params.theta.shape[0]:
            raise ValueError("X and theta have incompatible shapes")
        q = q_from_linpred(X @ params.theta, spec.q_link)
    else:
        q = np.full(n, float(q_from_linpred(params.theta[0], spec.q_link)))
    if spec.beta_regressed:
        if X.shape[1] != params.gamma.shape[0]:
            raise ValueError("X and gamma have incompatible shapes")
        beta = beta_from_linpred(X @ params.gamma)
    else:
        beta = np.full(n, float(beta_from_linpred(params.gamma[0])))
    return q, beta


def log_likelihood(data: Dataset, params: RegressionParams, spec: ModelSpec) -> float:
    """Sum of conditional log pmf terms over all observations."""
    q, beta = conditional_arrays(data.X, params, spec)
    return float(np.sum(dw.log_pmf_arr(data.y, q, beta)))


def _marginal_start(data: Dataset, spec: ModelSpec) -> RegressionParams:
    # intercepts from the proportions estimate on the marginal response,
    # mapped through the inverse links; slopes at zero
    sc = dw.summarize_sample(data.y)
    try:
        marg = dw.estimate_proportions(sc)
        q0, b0 = marg.q, marg.beta
    except Exception:
        q0 = min(max(1.0 - sc.zeros / sc.n, 0.05), 0.95)
        b0 = 1.0
    theta = np.zeros(data.p + 1 if spec.q_regressed else 1)
    gamma = np.zeros(data.p + 1 if spec.beta_regressed else 1)
    theta[0] = inverse_q_link(q0, spec.q_link)
    gamma[0] = math.log(b0)
    return RegressionParams(theta=theta, gamma=gamma)


@dataclass
class FitResult:
    """Outcome of a derivative-free maximum-likelihood fit."""

    params: RegressionParams
    loglik: float
    converged: bool
    nfev: int


def mle_fit(data: Dataset, spec: ModelSpec, start: RegressionParams | None = None,
            max_evals: int | None = None) -> FitResult:
    """Nelder-Mead maximization of the regression log-likelihood.

    Deterministic given the data and the starting point (defaults to the
    marginal-fit initialization).  Non-convergence is reported through the
    ``converged`` flag rather than raised.
    """
    layout = ParamLayout(spec, data.p)
    if data.n <= layout.dim:
        raise ValueError(f"need more than {layout.dim} observations, got {data.n}")
    x0 = layout.join(start if start is not None else _marginal_start(data, spec))
    if max_evals is None:
        max_evals = max(2000, 500 * layout.dim)

    def negloglik(vec):
        return -log_likelihood(data, layout.split(vec), spec)

    res = optimize.minimize(
        negloglik, x0, method="Nelder-Mead",
        options={"fatol": 1e-8, "xatol": 1e-8, "maxfev": max_evals, "maxiter": max_evals},
    )
    return FitResult(params=layout.split(res.x), loglik=-float(res.fun),
                     converged=bool(res.success), nfev=int(res.nfev))


def predict_quantile(x_row, params: RegressionParams, spec: ModelSpec, p: float) -> int:
    """Conditional quantile at covariate row x_row."""
    return dw.quantile(p, conditional_params(x_row, params, spec))


# ---------------------------------------------------------------------------
# Frequentist baselines (log-link Poisson and NB2)
# ---------------------------------------------------------------------------

@dataclass
class PoissonFit:
    coef: np.ndarray
    loglik: float
    converged: bool


@dataclass
class NBFit:
    coef: np.ndarray
    dispersion: float
    loglik: float
    converged: bool
    boundary: bool  # dispersion ran to the Poisson limit


def poisson_loglik(y, mu) -> float:
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return float(np.sum(y * np.log(mu) - mu - gammaln(y + 1.0)))


def _poisson_irls(y, X, offset_coef=None, weights_extra=None, tol=1e-10, max_iter=100):
    n, k = X.shape
    coef = np.zeros(k)
    coef[0] = math.log(max(float(np.mean(y)), 1e-8))
    if offset_coef is not None:
        coef = offset_coef.copy()
    converged = False
    for _ in range(max_iter):
        eta = np.clip(X @ coef, -30.0, 30.0)
        mu = np.exp(eta)
        w = mu if weights_extra is None else mu * weights_extra(mu)
        z = eta + (y - mu) / mu
        wx = X * w[:, None]
        try:
            new = np.linalg.solve(X.T @ wx, wx.T @ z)
        except np.linalg.LinAlgError:
            break
        if np.max(np.abs(new - coef)) < tol:
            coef = new
            converged = True
            break
        coef = new
    return coef, converged


def fit_poisson_baseline(data: Dataset) -> PoissonFit:
    """Log-link Poisson regression by iteratively reweighted least squares."""
    coef, converged = _poisson_irls(data.y.astype(float), data.X)
    mu = np.exp(np.clip(data.X @ coef, -30.0, 30.0))
    return PoissonFit(coef=coef, loglik=poisson_loglik(data.y, mu), converged=converged)


def nb_loglik(y, mu, theta: float) -> float:
    """NB2 log-likelihood with mean mu and variance mu + mu^2/theta."""
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    return float(np.sum(
        gammaln(y + theta) - gammaln(theta) - gammaln(y + 1.0)
        + theta * np.log(theta / (theta + mu)) + y * np.log(mu / (theta + mu))))


_NB_THETA_MAX = 1e6


def fit_nb_baseline(data: Dataset) -> NBFit:
    """NB2 regression by profile likelihood.

    For fixed dispersion the coefficient update is an IRLS step with
    working weights mu*theta/(theta+mu); the dispersion is then found by a
    bounded scalar search on its log.  Dispersion running to the upper
    bound means the data carry no overdispersion (Poisson limit), reported
    via the ``boundary`` flag.
    """
    y = data.y.astype(float)
    X = data.X
    pois = fit_poisson_baseline(data)

    def coef_given_theta(theta, init):
        return _poisson_irls(
            y, X, offset_coef=init, weights_extra=lambda mu: theta / (theta + mu))

    def profile_negloglik(log_theta):
        theta = math.exp(log_theta)
        coef, _ = coef_given_theta(theta, pois.coef)
        mu = np.exp(np.clip(X @ coef, -30.0, 30.0))
        return -nb_loglik(y, mu, theta)

    res = optimize.minimize_scalar(
        profile_negloglik, bounds=(math.log(1e-3), math.log(_NB_THETA_MAX)),
        method="bounded", options={"xatol": 1e-9})
    theta = float(math.exp(res.x))
    coef, converged = coef_given_theta(theta, pois.coef)
    mu = np.exp(np.clip(X @ coef, -30.0, 30.0))
    boundary = theta > 1e5
    return NBFit(coef=coef, dispersion=theta, loglik=nb_loglik(y, mu, theta),
                 converged=converged and bool(res.success), boundary=boundary)


def conditional_mean(params: DWParams) -> float:
    """Mean of one conditional distribution (truncated-series evaluation)."""
    return dw.trunc_mean(params)


def fitted_means(data: Dataset, params: RegressionParams, spec: ModelSpec) -> np.ndarray:
    """Conditional mean per observation under a fitted model."""
    q, beta = conditional_arrays(data.X, params, spec)
    out = np.empty(data.n)
    for i in range(data.n):
        out[i] = dw.trunc_mean(DWParams(float(q[i]), float(beta[i])))
    return out
