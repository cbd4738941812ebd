"""Estimate (beta, alpha, z) of a DRGG from degree histograms."""

from __future__ import annotations

import logging
import math
from enum import Enum
from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field
from scipy import optimize, stats
from scipy.special import zeta
from sklearn.linear_model import LinearRegression

from errors import DrggError, InsufficientDataError, InvalidInputError
from graphstats import DegreeHistogram
from theory import edge_prob_exact

logger = logging.getLogger(__name__)

MIN_TAIL = 50
# Exponent search interval for the discrete power law.
_GAMMA_BOUNDS = (1.0001, 20.0)


class FitMethod(str, Enum):
    mle_tail = 'mle_tail'
    loglog_ls = 'loglog_ls'


class BinomialFit(BaseModel):
    z_hat: float = Field(ge=0.0, le=1.0)
    mean: float
    tv_distance: float


class FitResult(BaseModel):
    """Fitted DRGG parameters; field order is the serialized order."""

    method: FitMethod = FitMethod.mle_tail
    beta_hat: float = Field(gt=0.0)
    gamma_hat: float = Field(gt=1.0)
    alpha_hat: Optional[float] = None
    d: Optional[int] = None
    z_hat: float = Field(ge=0.0, le=1.0)
    z_tv_distance: Optional[float] = None
    k_min: int = Field(ge=1)
    n_tail: int
    goodness: float
    loglog_beta: Optional[float] = None
    loglik_ratio: float = 0.0
    loglik_p_value: float = 1.0
    power_law_plausible: bool = True
    z_theory: Optional[float] = None
    z_ratio: Optional[float] = None


def _tail(degrees: np.ndarray, k_min: int) -> np.ndarray:
    return degrees[degrees >= k_min]


def _powerlaw_loglik(gamma: float, tail: np.ndarray, k_min: int, log_sum: float) -> float:
    return -gamma * log_sum - tail.size * math.log(zeta(gamma, k_min))


def _mle_gamma(tail: np.ndarray, k_min: int) -> float:
    log_sum = float(np.log(tail).sum())
    res = optimize.minimize_scalar(
        lambda g: -_powerlaw_loglik(g, tail, k_min, log_sum),
        bounds=_GAMMA_BOUNDS, method='bounded', options={'xatol': 1e-7},
    )
    return float(res.x)


def _ks_distance(tail: np.ndarray, gamma: float, k_min: int) -> float:
    ks, counts = np.unique(tail, return_counts=True)
    empirical = np.cumsum(counts) / tail.size
    model = 1.0 - zeta(gamma, ks + 1.0) / zeta(gamma, k_min)
    # Compare just below each jump too, so a step's both sides count.
    below = np.concatenate(([0.0], empirical[:-1]))
    model_below = np.concatenate(([0.0], model[:-1]))
    return float(max(np.abs(empirical - model).max(), np.abs(below - model_below).max()))


def _k_min_candidates(degrees: np.ndarray) -> np.ndarray:
    top = np.percentile(degrees, 90)
    observed = np.unique(degrees)
    return observed[(observed >= 2) & (observed <= top)]


def vuong_vs_geometric(tail: np.ndarray, gamma: float, k_min: int) -> Tuple[float, float]:
    """(log-likelihood ratio power law - geometric, two-sided p-value)."""
    excess = float((tail - k_min).mean())
    q = excess / (1.0 + excess)
    log_pl = -gamma * np.log(tail) - math.log(zeta(gamma, k_min))
    if q == 0.0:
        log_geo = np.zeros(tail.size)
    else:
        log_geo = math.log(1.0 - q) + (tail - k_min) * math.log(q)
    diff = log_pl - log_geo
    ratio = float(diff.sum())
    sigma = float(diff.std())
    if sigma == 0.0:
        return ratio, 0.0 if ratio != 0.0 else 1.0
    z = ratio / (sigma * math.sqrt(tail.size))
    return ratio, float(2.0 * stats.norm.sf(abs(z)))


def loglog_fit(hist: DegreeHistogram, k_min: int = 1) -> float:
    """beta from a least-squares line through log count vs log k on k >= k_min."""
    pairs = [(k, c) for k, c in sorted(hist.counts.items()) if k >= max(k_min, 1) and c > 0]
    if len(pairs) < 2:
        raise InsufficientDataError(f'need two non-empty degrees >= {k_min} for a log-log fit')
    x = np.log([[float(k)] for k, _ in pairs])
    y = np.log([float(c) for _, c in pairs])
    model = LinearRegression().fit(x, y)
    beta = float(-model.coef_[0] - 1.0)
    if beta <= 0.0:
        raise InsufficientDataError(f'log-log slope {-beta - 1.0:.4g} does not fall faster than k^-1')
    return beta


def fit_binomial(hist: DegreeHistogram, n: int) -> BinomialFit:
    """Method-of-moments z = mean / (n-1) and the TV distance to Binomial(n-1, z)."""
    if n < 2:
        raise InvalidInputError(f'n must be >= 2, got {n}')
    mean = hist.mean()
    z = min(max(mean / (n - 1), 0.0), 1.0)
    size = max(n, (max(hist.counts) + 1) if hist.counts else 1)
    empirical = hist.pmf(size)
    model = stats.binom.pmf(np.arange(size), n - 1, z)
    tv = float(0.5 * np.abs(empirical - model).sum())
    return BinomialFit(z_hat=z, mean=mean, tv_distance=tv)


def fit_powerlaw_tail(hist: DegreeHistogram, method: FitMethod = FitMethod.mle_tail) -> FitResult:
    """Discrete power-law fit of the histogram tail; k_min minimizes the KS distance."""
    method = FitMethod(method)
    degrees = hist.degrees()
    if int((degrees >= 2).sum()) < MIN_TAIL:
        raise InsufficientDataError(f'need at least {MIN_TAIL} vertices with degree >= 2')
    best: Optional[Tuple[float, int, float]] = None
    for k_min in _k_min_candidates(degrees):
        tail = _tail(degrees, int(k_min))
        if tail.size < MIN_TAIL:
            continue
        gamma = _mle_gamma(tail, int(k_min))
        ks = _ks_distance(tail, gamma, int(k_min))
        if best is None or ks < best[0]:
            best = (ks, int(k_min), gamma)
    if best is None:
        raise InsufficientDataError(f'no tail cutoff leaves {MIN_TAIL} vertices')
    ks, k_min, gamma = best
    tail = _tail(degrees, k_min)
    ratio, p_value = vuong_vs_geometric(tail, gamma, k_min)
    plausible = not (ratio < 0.0 and p_value < 0.1)
    if not plausible:
        logger.warning(
            'fit.fit_powerlaw_tail: geometric tail preferred (R=%.3g, p=%.3g); power law not plausible',
            ratio, p_value,
        )
    try:
        loglog_beta = loglog_fit(hist, k_min)
    except InsufficientDataError:
        loglog_beta = None
    beta = gamma - 1.0
    if method == FitMethod.loglog_ls:
        if loglog_beta is None:
            raise InsufficientDataError('log-log fit needs two non-empty degrees in the tail')
        beta = loglog_beta
    n = max(hist.total, 2)
    logger.info('fit.fit_powerlaw_tail: k_min=%d n_tail=%d gamma=%.4f ks=%.4f', k_min, tail.size, gamma, ks)
    return FitResult(
        method=method,
        beta_hat=beta,
        gamma_hat=gamma,
        z_hat=min(hist.mean() / (n - 1), 1.0),
        k_min=k_min,
        n_tail=int(tail.size),
        goodness=ks,
        loglog_beta=loglog_beta,
        loglik_ratio=ratio,
        loglik_p_value=p_value,
        power_law_plausible=plausible,
    )


def fit_model(
    in_hist: DegreeHistogram,
    out_hist: DegreeHistogram,
    n: int,
    d: Optional[int] = None,
    method: FitMethod = FitMethod.mle_tail,
    strict: bool = True,
) -> FitResult:
    """beta from the indegree tail, z from the outdegree mean, alpha = beta d + 1 when d is given.

    An implausible power-law tail raises InsufficientDataError; with ``strict=False`` the
    result is returned instead, flagged by ``power_law_plausible``.
    """
    tail_fit = fit_powerlaw_tail(in_hist, method)
    if strict and not tail_fit.power_law_plausible:
        raise InsufficientDataError(
            f'indegree tail is not power-law (loglik ratio {tail_fit.loglik_ratio:.3g}, p={tail_fit.loglik_p_value:.3g})'
        )
    binomial = fit_binomial(out_hist, n)
    alpha_hat = tail_fit.beta_hat * d + 1.0 if d else None
    z_theory = None
    if d and alpha_hat is not None:
        try:
            z_theory = edge_prob_exact(n, alpha_hat, d)
        except DrggError as exc:
            logger.warning('fit.fit_model: no theoretical z at alpha_hat=%.4f: %s', alpha_hat, exc)
    return tail_fit.model_copy(update={
        'alpha_hat': alpha_hat,
        'd': d,
        'z_hat': binomial.z_hat,
        'z_tv_distance': binomial.tv_distance,
        'z_theory': z_theory,
        'z_ratio': binomial.z_hat / z_theory if z_theory else None,
    })


def sample_powerlaw_degrees(n: int, gamma: float, k_min: int, k_max: int, seed: int = 0) -> np.ndarray:
    """n i.i.d. draws from P[k] proportional to k^-gamma on [k_min, k_max]."""
    if not 1 <= k_min <= k_max:
        raise InvalidInputError(f'need 1 <= k_min <= k_max, got {k_min}, {k_max}')
    ks = np.arange(k_min, k_max + 1)
    weights = ks.astype(np.float64) ** (-gamma)
    return np.random.default_rng(seed).choice(ks, size=n, p=weights / weights.sum())
