"""Random-walk Metropolis-Hastings over the regression coefficients.

One iteration proposes a joint Gaussian perturbation of every free
coordinate (diagonal covariance) and accepts by the Metropolis rule; with
a Laplace prior the shrinkage rates are then refreshed by exact Gibbs
draws from their Gamma full conditionals.  Proposal scales adapt during
burn-in toward a target acceptance band and are frozen afterwards, so the
kept chain is generated by a fixed kernel.  A seed fully determines the
output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence
import warnings

import numpy as np

from .exceptions import NumericalError
from .priors import HyperState, PriorSpec, gamma_logpdf, gibbs_update_rate, log_prior
from .regression import (
    Dataset,
    ModelSpec,
    ParamLayout,
    RegressionParams,
    _marginal_start,
    log_likelihood,
    mle_fit,
)

DEFAULT_BAND = (0.22, 0.25)
TUNE_INTERVAL = 500
AUTO_SCALE = 0.1
# above this many free coordinates the MLE warm start is skipped (the
# simplex search is unreliable there) in favor of the marginal start
MLE_INIT_MAX_DIM = 12


@dataclass(frozen=True)
class ChainConfig:
    iterations: int = 25_000
    burnin_fraction: float = 0.25
    target_band: tuple[float, float] = DEFAULT_BAND
    seed: int = 0
    thin: int = 1
    initial_scales: str | Sequence[float] = "auto"

    def __post_init__(self):
        if self.iterations < 1000:
            raise ValueError("iterations must be at least 1000")
        if not 0.0 < self.burnin_fraction < 1.0:
            raise ValueError("burnin_fraction must lie in (0, 1)")
        lo, hi = self.target_band
        if not 0.0 < lo < hi < 1.0:
            raise ValueError("target band must satisfy 0 < low < high < 1")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    @property
    def burnin_iterations(self) -> int:
        return self.iterations - int(self.iterations * (1.0 - self.burnin_fraction))

    @property
    def kept_rows(self) -> int:
        # floor(iterations * (1 - burnin_fraction)) // thin, by keeping the
        # last draw of each post-burn-in block of `thin` iterations
        return (self.iterations - self.burnin_iterations) // self.thin


@dataclass
class ChainOutput:
    samples: np.ndarray  # kept rows x (free params [+ lambda, tau])
    param_names: list[str]
    loglik_trace: np.ndarray
    acceptance_rate: float
    tuned_scales: np.ndarray
    seed: int
    config: ChainConfig | None = None
    model_label: str = ""

    def column(self, name: str) -> np.ndarray:
        return self.samples[:, self.param_names.index(name)]


def tune_scales(window_acceptance: float, scales: np.ndarray,
                band: tuple[float, float]) -> np.ndarray:
    """Burn-in proposal adaptation: one multiplicative step toward the band."""
    lo, hi = band
    if window_acceptance > hi:
        return scales * 1.1
    if window_acceptance < lo:
        return scales * 0.9
    return scales


@dataclass
class MHState:
    """Position and cached log-density of a random-walk chain."""

    log_density: Callable[[np.ndarray], float]
    position: np.ndarray
    current: float
    scales: np.ndarray
    accepted: bool = False


def mh_step(state: MHState, rng: np.random.Generator) -> MHState:
    """One symmetric random-walk proposal; consumes d normals + 1 uniform."""
    proposal = state.position + rng.normal(size=state.position.shape) * state.scales
    lp = state.log_density(proposal)
    with np.errstate(divide="ignore"):
        accept = math.log(rng.random()) < lp - state.current
    if accept:
        return MHState(state.log_density, proposal, lp, state.scales, True)
    return MHState(state.log_density, state.position, state.current, state.scales, False)


def run_mh(log_density, x0, iterations: int, *, rng=None, seed: int = 0,
           burnin_fraction: float = 0.25, band: tuple[float, float] = DEFAULT_BAND,
           initial_scales=AUTO_SCALE, tune_interval: int = TUNE_INTERVAL):
    """Generic driver used to validate the kernel on analytic targets.

    Returns ``(kept_samples, acceptance_rate, tuned_scales)`` where the
    acceptance rate is measured after burn-in.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    x = np.asarray(x0, dtype=float).copy()
    scales = np.full(x.shape, initial_scales, dtype=float) \
        if np.isscalar(initial_scales) else np.asarray(initial_scales, dtype=float).copy()
    state = MHState(log_density, x, float(log_density(x)), scales)
    if not math.isfinite(state.current):
        raise NumericalError("bad initialization: log density not finite at start")
    burnin = iterations - int(iterations * (1.0 - burnin_fraction))
    kept = np.empty((iterations - burnin, x.shape[0]))
    window_accepts = 0
    post_accepts = 0
    for it in range(iterations):
        state = mh_step(state, rng)
        if it < burnin:
            window_accepts += state.accepted
            if (it + 1) % tune_interval == 0:
                state.scales = tune_scales(window_accepts / tune_interval,
                                           state.scales, band)
                window_accepts = 0
        else:
            post_accepts += state.accepted
            kept[it - burnin] = state.position
    n_post = iterations - burnin
    return kept, post_accepts / max(n_post, 1), state.scales


def effective_sample_size(trace) -> float:
    """ESS by the initial-positive-sequence truncation of the autocorrelation.

    Pair sums of autocorrelations at lags (2m, 2m+1) are accumulated while
    positive; the integrated time is 2 * sum - 1 and the result is capped
    at the trace length.  A constant trace has no information: returns 0.
    """
    x = np.asarray(trace, dtype=float)
    n = x.shape[0]
    if n < 100:
        raise ValueError(f"need at least 100 samples for an ESS estimate, got {n}")
    x = x - x.mean()
    var = float(np.dot(x, x)) / n
    if var == 0.0:
        warnings.warn("constant trace: effective sample size undefined, returning 0")
        return 0.0
    # autocovariance via FFT
    nfft = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(f * np.conjugate(f), nfft)[:n].real / n
    rho = acov / acov[0]
    tau = 0.0
    m = 0
    while True:
        lag0, lag1 = 2 * m, 2 * m + 1
        if lag1 >= n:
            break
        pair = rho[lag0] + rho[lag1]
        if pair <= 0.0:
            break
        tau += pair
        m += 1
    tau = 2.0 * tau - 1.0
    if tau <= 0.0:
        return float(n)
    return float(min(n / tau, n))


def _initial_position(data: Dataset, model_spec: ModelSpec,
                      layout: ParamLayout) -> np.ndarray:
    start = _marginal_start(data, model_spec)
    if layout.dim <= MLE_INIT_MAX_DIM:
        try:
            fit = mle_fit(data, model_spec, start=start)
            if fit.converged:
                return layout.join(fit.params)
        except Exception:
            pass
    return layout.join(start)


def run_chain(data: Dataset, model_spec: ModelSpec, prior_spec: PriorSpec,
              config: ChainConfig, start: RegressionParams | None = None) -> ChainOutput:
    """Sample the posterior of a discrete Weibull regression model.

    With a Laplace prior each iteration interleaves the Metropolis update
    of the coefficients with exact Gibbs refreshes of the two shrinkage
    rates, which are recorded as extra columns.
    """
    layout = ParamLayout(model_spec, data.p)
    laplace = prior_spec.kind == "laplace"
    rng = np.random.default_rng(config.seed)

    if start is not None:
        x = layout.join(start)
    else:
        x = _initial_position(data, model_spec, layout)

    if laplace:
        prior_mean = prior_spec.hyper_a / prior_spec.hyper_b
        hyper = HyperState(prior_mean, prior_mean)
    else:
        hyper = None
    pen_idx = layout.penalized_indices(prior_spec.penalize_intercepts)
    theta_pen = pen_idx[pen_idx < layout.theta_len]
    gamma_pen = pen_idx[pen_idx >= layout.theta_len]

    def loglik_of(vec):
        return log_likelihood(data, layout.split(vec), model_spec)

    def logpost_of(vec, ll):
        if not laplace:
            return ll
        return (ll + log_prior(layout.split(vec), hyper, prior_spec)
                + gamma_logpdf(hyper.lam, prior_spec.hyper_a, prior_spec.hyper_b)
                + gamma_logpdf(hyper.tau, prior_spec.hyper_a, prior_spec.hyper_b))

    ll_cur = loglik_of(x)
    lp_cur = logpost_of(x, ll_cur)
    if not math.isfinite(lp_cur):
        raise NumericalError(
            "bad initialization: log posterior is not finite at the start "
            f"(loglik={ll_cur!r}, position={x.tolist()})")

    if isinstance(config.initial_scales, str):
        if config.initial_scales != "auto":
            raise ValueError(f"unknown initial_scales {config.initial_scales!r}")
        scales = np.full(layout.dim, AUTO_SCALE)
    else:
        scales = np.asarray(config.initial_scales, dtype=float).copy()
        if scales.shape != (layout.dim,):
            raise ValueError(f"initial_scales must have length {layout.dim}")
        if np.any(scales <= 0):
            raise ValueError("initial_scales must be positive")

    burnin = config.burnin_iterations
    kept_rows = config.kept_rows
    n_cols = layout.dim + (2 if laplace else 0)
    samples = np.empty((kept_rows, n_cols))
    loglik_trace = np.empty(kept_rows)
    band = config.target_band

    window_accepts = 0
    post_accepts = 0
    row = 0
    for it in range(config.iterations):
        prop = x + rng.normal(size=layout.dim) * scales
        ll_p = loglik_of(prop)
        lp_p = logpost_of(prop, ll_p)
        with np.errstate(divide="ignore"):
            accepted = math.log(rng.random()) < lp_p - lp_cur
        if accepted:
            x, ll_cur, lp_cur = prop, ll_p, lp_p

        if laplace:
            hyper.lam = gibbs_update_rate(
                x[theta_pen], prior_spec.hyper_a, prior_spec.hyper_b, rng)
            hyper.tau = gibbs_update_rate(
                x[gamma_pen], prior_spec.hyper_a, prior_spec.hyper_b, rng)
            lp_cur = logpost_of(x, ll_cur)

        if it < burnin:
            window_accepts += accepted
            if (it + 1) % TUNE_INTERVAL == 0:
                scales = tune_scales(window_accepts / TUNE_INTERVAL, scales, band)
                window_accepts = 0
        else:
            post_accepts += accepted
            if (it - burnin) % config.thin == config.thin - 1:
                samples[row, : layout.dim] = x
                if laplace:
                    samples[row, layout.dim] = hyper.lam
                    samples[row, layout.dim + 1] = hyper.tau
                loglik_trace[row] = ll_cur
                row += 1

    names = layout.names + (["lambda", "tau"] if laplace else [])
    n_post = config.iterations - burnin
    return ChainOutput(
        samples=samples,
        param_names=names,
        loglik_trace=loglik_trace,
        acceptance_rate=post_accepts / max(n_post, 1),
        tuned_scales=scales,
        seed=config.seed,
        config=config,
        model_label=model_spec.label(),
    )
