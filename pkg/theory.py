"""Closed-form and quadrature predictions for G(n, alpha, d).

Everything here is a pure function of (n, alpha, d) or of the quantities derived from
them. Combinatorial factors go through log-gamma so n up to 10^8 stays finite.
"""

from __future__ import annotations

import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel
from scipy import integrate, stats
from scipy.special import betainc, betaincc, betaln, gammaln, xlog1py, xlogy

from errors import DomainError, InvalidInputError, ModelInfeasibleError
from geometry import RadiusLaw, ball_volume, sphere_surface

logger = logging.getLogger(__name__)


class TheoryReport(BaseModel):
    """All predictions for one (n, alpha, d); field order is the serialized order."""

    n: int
    alpha: float
    d: int
    beta: float
    r0: float
    eta: float
    z_exact: float
    z_asymptotic: float
    z_error_bound: float
    expected_edges: float
    indegree_exponent: float
    clustering_constant: Optional[float] = None
    clustering_available: bool = True
    clustering_fallback: Optional[float] = None
    clustering_expected: float
    clustering_limit_alpha_inf: Optional[float] = None
    reciprocity_limit: float
    reciprocity_exact: float
    expected_type1_lower: float
    expected_type1_upper: float
    expected_paths: Dict[int, float]
    path_threshold_k: Optional[int] = None


def beta_of(alpha: float, d: int) -> float:
    return (alpha - 1.0) / d


def _log_quad(func, lo: float, hi: float) -> float:
    """int_lo^hi func(r) dr evaluated over t = ln r (mass piles up near r0)."""
    value, _ = integrate.quad(
        lambda t: func(math.exp(t)) * math.exp(t), math.log(lo), math.log(hi),
        epsabs=0.0, epsrel=1e-12, limit=200,
    )
    return value


def _model_law(n: int, alpha: float, d: int) -> RadiusLaw:
    if not alpha > d + 1:
        raise ModelInfeasibleError(f'alpha={alpha} must exceed d+1={d + 1}')
    return RadiusLaw.for_model(n, alpha, d)


# ---------------------------------------------------------------- edge probability


def edge_prob_exact(n: int, alpha: float, d: int) -> float:
    """z = int_{r0}^{1/2} eta r^-alpha V_d r^d dr, written relative to r0 to stay finite."""
    law = _model_law(n, alpha, d)
    r0 = law.r0
    a1 = alpha - 1.0
    return (
        ball_volume(d) * a1 * r0 ** d * (1.0 - (2.0 * r0) ** (a1 - d))
        / ((a1 - d) * (1.0 - (2.0 * r0) ** a1))
    )


def edge_prob_quadrature(n: int, alpha: float, d: int) -> float:
    """Adaptive quadrature of the same integral as ``edge_prob_exact``."""
    law = _model_law(n, alpha, d)
    return _log_quad(lambda r: float(law.pdf(r) * law.coverage(r)), law.r0, 0.5)


def edge_prob_asymptotic(n: int, alpha: float, d: int) -> float:
    """Leading term ((alpha-1)/(alpha-1-d)) ln n / n."""
    if not alpha > d + 1:
        raise ModelInfeasibleError(f'alpha={alpha} must exceed d+1={d + 1}')
    if n < 2:
        raise InvalidInputError(f'n must be >= 2, got {n}')
    return (alpha - 1.0) / (alpha - 1.0 - d) * math.log(n) / n


def z_error_bound(n: int, alpha: float, d: int) -> float:
    """Order (ln n / n)^(beta-1) of the gap between exact and asymptotic z."""
    return (math.log(n) / n) ** (beta_of(alpha, d) - 1.0)


def expected_edges(n: int, alpha: float, d: int) -> float:
    return n * (n - 1) * edge_prob_exact(n, alpha, d)


def outdegree_pmf(n: int, alpha: float, d: int, k):
    """Binomial(n-1, z_exact) pmf at k (vectorized)."""
    return stats.binom.pmf(k, n - 1, edge_prob_exact(n, alpha, d))


# ---------------------------------------------------------------- indegree law


def indegree_exponent(alpha: float, d: int) -> float:
    """Power-law exponent beta + 1 of the indegree density."""
    if not alpha > d + 1:
        raise ModelInfeasibleError(f'alpha={alpha} must exceed d+1={d + 1}')
    return beta_of(alpha, d) + 1.0


def _u_limits(law: RadiusLaw) -> Tuple[float, float]:
    return float(law.coverage(law.r0)), float(law.coverage(0.5))


def _log_prefactor(law: RadiusLaw, n_other: int, k) -> np.ndarray:
    beta = law.beta
    k = np.asarray(k, dtype=np.float64)
    log_binom = gammaln(n_other + 1.0) - gammaln(k + 1.0) - gammaln(n_other - k + 1.0)
    return math.log(law.eta / law.d) + beta * math.log(ball_volume(law.d)) + log_binom


def _indegree_exact_values(law: RadiusLaw, n: int, ks: np.ndarray) -> np.ndarray:
    big_n = n - 1
    beta = law.beta
    lo, hi = _u_limits(law)
    ks = np.asarray(ks, dtype=np.int64)
    log_pre = _log_prefactor(law, big_n, ks)
    p = ks - beta
    q = big_n - ks + 1.0
    out = np.zeros(ks.size)
    regular = p > 0
    if regular.any():
        pr, qr = p[regular], q[regular]
        ia, ib = betainc(pr, qr, lo), betainc(pr, qr, hi)
        # Use whichever tail keeps the difference away from cancellation.
        upper = ia > 0.5
        diff = np.where(upper, betaincc(pr, qr, lo) - betaincc(pr, qr, hi), ib - ia)
        with np.errstate(divide='ignore'):
            out[regular] = np.exp(log_pre[regular] + betaln(pr, qr) + np.log(np.maximum(diff, 0.0)))
    for i in np.flatnonzero(~regular):
        k = int(ks[i])

        def integrand(u, k=k, lp=float(log_pre[i])):
            return math.exp(lp + float(xlogy(k - beta - 1.0, u)) + float(xlog1py(big_n - k, -u)))

        marks = [x for x in (2.0 * lo, 10.0 * lo, 100.0 * lo) if lo < x < hi]
        value, _ = integrate.quad(integrand, lo, hi, points=marks or None, limit=400, epsabs=0.0, epsrel=1e-11)
        out[i] = value
    return out


def indegree_pdf_exact(n: int, alpha: float, d: int, k: int) -> float:
    """P[indegree = k] with n-1 candidate in-neighbours, by incomplete beta / quadrature."""
    if int(k) != k or not 0 <= k <= n - 1:
        raise InvalidInputError(f'k must be an integer in [0, {n - 1}], got {k!r}')
    law = _model_law(n, alpha, d)
    return float(_indegree_exact_values(law, n, np.array([int(k)]))[0])


def indegree_pmf_exact(n: int, alpha: float, d: int) -> np.ndarray:
    """Exact indegree pmf for k = 0 .. n-1."""
    law = _model_law(n, alpha, d)
    return _indegree_exact_values(law, n, np.arange(n))


def indegree_pdf_approx(n: int, alpha: float, d: int, k: int) -> float:
    """Steepest-descent value of P[indegree = k], prefactor eta/d V_d^beta kept.

    Defined for beta + 1 < k <= n - 1.
    """
    law = _model_law(n, alpha, d)
    big_n = n - 1
    beta = beta_of(alpha, d)
    if k > big_n or k < 0:
        raise InvalidInputError(f'k must lie in [0, {big_n}], got {k!r}')
    if not k > beta + 1.0:
        raise DomainError(f'saddle point lies outside (0, 1) for k={k} <= beta+1={beta + 1.0:.4f}')
    if k == big_n:
        return 0.0
    km = k - beta - 1.0
    log_value = (
        float(_log_prefactor(law, big_n, k))
        + 0.5 * math.log(2.0 * math.pi)
        + (km + 0.5) * math.log(km)
        + (big_n - k + 0.5) * math.log(big_n - k)
        - (big_n - beta + 0.5) * math.log(big_n - beta - 1.0)
    )
    return math.exp(log_value)


def indegree_saddle_window(n: int, alpha: float, d: int) -> Tuple[int, int]:
    """k-range whose saddle point sits two binomial sd inside [V_d r0^d, V_d/2^d]."""
    law = _model_law(n, alpha, d)
    big_n = n - 1
    beta = beta_of(alpha, d)
    lo, hi = _u_limits(law)
    spread = big_n - beta - 1.0
    k_lo = math.ceil(beta + 1.0 + spread * lo + 2.0 * math.sqrt(big_n * lo * (1.0 - lo)))
    k_hi = math.floor(beta + 1.0 + spread * hi - 2.0 * math.sqrt(big_n * hi * (1.0 - hi)))
    k_lo = max(k_lo, math.floor(beta + 1.0) + 1)
    k_hi = min(k_hi, big_n - 1)
    if k_lo > k_hi:
        raise DomainError(f'no saddle-valid indegree window for n={n}, alpha={alpha}, d={d}')
    return k_lo, k_hi


def indegree_pmf_approx(n: int, alpha: float, d: int, window: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    """(ks, probabilities) of the approximation renormalized to sum to 1.

    ``window=True`` restricts to ``indegree_saddle_window``; otherwise every k in
    (beta+1, n-1] is used.
    """
    if window:
        k_lo, k_hi = indegree_saddle_window(n, alpha, d)
    else:
        k_lo, k_hi = math.floor(beta_of(alpha, d) + 1.0) + 1, n - 1
    ks = np.arange(k_lo, k_hi + 1)
    values = np.array([indegree_pdf_approx(n, alpha, d, int(k)) for k in ks])
    return ks, values / values.sum()


def approx_total_variation(n: int, alpha: float, d: int, window: bool = True) -> float:
    """TV distance between the renormalized approximation and the exact pmf on the same ks."""
    ks, approx = indegree_pmf_approx(n, alpha, d, window=window)
    exact = indegree_pmf_exact(n, alpha, d)[ks]
    exact = exact / exact.sum()
    return float(0.5 * np.abs(approx - exact).sum())


def indegree_stirling_bounds(n: int, alpha: float, d: int, k: int) -> Tuple[float, float]:
    """Stirling sandwich of the approximation: (N/k)^(beta+1) and (N/(k-beta-1))^(beta+1) forms."""
    law = _model_law(n, alpha, d)
    big_n = n - 1
    beta = beta_of(alpha, d)
    if not k > beta + 1.0:
        raise DomainError(f'k={k} must exceed beta+1={beta + 1.0:.4f}')
    scale = law.eta / d * ball_volume(d) ** beta / (big_n - beta - 1.0)
    return scale * (big_n / k) ** (beta + 1.0), scale * (big_n / (k - beta - 1.0)) ** (beta + 1.0)


# ---------------------------------------------------------------- reciprocity


def reciprocity_limit(alpha: float, d: int) -> float:
    """(2 beta - 2) / (2 beta - 1)."""
    if not alpha > d + 1:
        raise ModelInfeasibleError(f'alpha={alpha} must exceed d+1={d + 1}')
    beta = beta_of(alpha, d)
    return (2.0 * beta - 2.0) / (2.0 * beta - 1.0)


def reciprocity_exact(n: int, alpha: float, d: int) -> float:
    """P[u->v | v->u] at finite n: S_{d-1} int_0^{1/2} r^{d-1} P[R>=r]^2 dr / z."""
    law = _model_law(n, alpha, d)
    tail = _log_quad(lambda r: r ** (d - 1) * float(law.survival(r)) ** 2, law.r0, 0.5)
    both = sphere_surface(d) * (law.r0 ** d / d + tail)
    return both / edge_prob_exact(n, alpha, d)


# ---------------------------------------------------------------- triangles


def triangle_prob_bounds(n: int, alpha: float, d: int) -> Tuple[float, float]:
    """(lower, upper) on P[v->u, w->u, v->w].

    Upper drops the v->w condition; lower keeps only r_w > 2 r_u, where it always holds.
    """
    law = _model_law(n, alpha, d)
    upper = _log_quad(lambda r: float(law.pdf(r) * law.coverage(r) ** 2), law.r0, 0.5)
    lower = 0.0
    if law.r0 < 0.25:
        lower = _log_quad(
            lambda r: float(law.pdf(r) * law.coverage(r) ** 2 * law.survival(2.0 * r)), law.r0, 0.25,
        )
    return lower, upper


def expected_type1_bounds(n: int, alpha: float, d: int) -> Tuple[float, float]:
    lower, upper = triangle_prob_bounds(n, alpha, d)
    triples = n * (n - 1.0) * (n - 2.0)
    return triples * lower, triples * upper


# ---------------------------------------------------------------- clustering


def _double_factorial(m: int) -> int:
    return math.prod(range(m, 0, -2))


def _odd_d(d: int) -> None:
    if d < 1 or d % 2 == 0:
        raise DomainError(f'closed form needs odd d >= 1, got {d}')


def _series_terms(d: int) -> List[Tuple[float, int]]:
    """(coefficient, 2k+d+1) pairs of the odd-d pair-distance series, k = 0..(d-1)/2."""
    half = (d - 1) // 2
    return [
        ((-1) ** k / (2 * k + 1) * math.comb(half, k), 2 * k + d + 1)
        for k in range(half + 1)
    ]


def _series_scale(d: int) -> float:
    return d * _double_factorial(d) / _double_factorial(d - 1)


def clustering_limit(d: int) -> Optional[float]:
    """alpha -> infinity clustering of the odd-d model (fixed-radius value); None for even d."""
    if d % 2 == 0:
        return None
    _odd_d(d)
    total = sum(c * (1.0 / d - 1.0 / (2 ** (m - d) * m)) for c, m in _series_terms(d))
    return _series_scale(d) * total


def clustering_sum(alpha: float, d: int, squared_denominators: bool = True) -> float:
    """Finite odd-d series for the clustering constant.

    ``squared_denominators=True`` uses (a^2 - m^2) for every m = 2k+d+1 term; ``False``
    uses (a^2 - m), the variant that reproduces the tabulated d=3 and d=5 forms.
    """
    _odd_d(d)
    if not alpha > 2 * d + 1:
        raise DomainError(f'clustering constant needs alpha > 2d+1={2 * d + 1}, got {alpha}')
    a2 = (alpha - 1.0) ** 2
    total = 0.0
    for c, m in _series_terms(d):
        shift = m * m if squared_denominators else m
        # 2^(2k+1) == 2^(m-d)
        total += c * (a2 / (d * (a2 - d * d)) - a2 / (2 ** (m - d) * m * (a2 - shift)))
    return _series_scale(d) * total


def _table_d1(alpha: float) -> float:
    return (alpha - 1.0) ** 2 / 4.0 * (4.0 / (alpha ** 2 - 2.0 * alpha) + 1.0 / (-alpha ** 2 - 2.0 * alpha + 1.0))


def _table_d3(alpha: float) -> float:
    s = alpha ** 2 - 2.0 * alpha
    num = 3.0 * (alpha - 1.0) ** 2 * (5 * alpha ** 4 - 20 * alpha ** 3 + 9 * alpha ** 2 + 22 * alpha - 72)
    return num / (32.0 * (s - 8.0) * (s - 5.0) * (s - 3.0))


def _table_d5(alpha: float) -> float:
    s = alpha ** 2 - 2.0 * alpha
    poly = (
        159 * alpha ** 6 - 954 * alpha ** 5 + 5364 * alpha ** 4 - 15096 * alpha ** 3
        - 73679 * alpha ** 2 + 175006 * alpha + 392040
    )
    return (alpha - 1.0) ** 2 * poly / (512.0 * (s - 24.0) * (s - 9.0) * (s - 7.0) * (s - 5.0))


_TABLE_FORMS = {1: _table_d1, 3: _table_d3, 5: _table_d5}


def clustering_constant(alpha: float, d: int) -> Optional[float]:
    """Clustering constant for odd d (tabulated rational forms for d <= 5); None for even d."""
    if d % 2 == 0:
        return None
    _odd_d(d)
    if not alpha > 2 * d + 1:
        raise DomainError(f'clustering constant needs alpha > 2d+1={2 * d + 1}, got {alpha}')
    form = _TABLE_FORMS.get(d)
    if form is not None:
        return form(alpha)
    return clustering_sum(alpha, d, squared_denominators=False)


def _ratio_density(s: float, a: float) -> float:
    # Density of r_w / r_u for two independent untruncated Pareto radii with tail index a.
    return 0.5 * a * (s ** (a - 1.0) if s < 1.0 else s ** (-a - 1.0))


def _uniform_ball(rng: np.random.Generator, size: int, d: int) -> np.ndarray:
    direction = rng.standard_normal((size, d))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return direction * rng.random((size, 1)) ** (1.0 / d)


def clustering_expected(
    alpha: float,
    d: int,
    method: str = 'auto',
    samples: int = 200_000,
    seed: int = 0,
) -> float:
    """Large-n expectation of the in-clustering (excluding indegree < 2).

    Equals E[D(min(r_w/r_u, 2))] with D the pair-distance CDF in a unit ball. Odd d is
    integrated over the radius ratio; even d (or ``method='monte_carlo'``) samples point
    pairs in the unit ball.
    """
    if not alpha > 1.0:
        raise DomainError(f'alpha must exceed 1, got {alpha}')
    a = alpha - 1.0
    if method == 'auto':
        method = 'quadrature' if d % 2 == 1 else 'monte_carlo'
    if method == 'quadrature':
        _odd_d(d)
        inner = 0.0
        for lo, hi in ((0.0, 1.0), (1.0, 2.0)):
            part, _ = integrate.quad(
                lambda s: _ratio_density(s, a) * float(pair_distance_cdf(s, 1.0, d)),
                lo, hi, epsabs=0.0, epsrel=1e-12, limit=200,
            )
            inner += part
        # D = 1 once the ratio reaches 2: mass 0.5 * 2^-a.
        return inner + 0.5 * 2.0 ** (-a)
    if method != 'monte_carlo':
        raise InvalidInputError(f'unknown method {method!r}')
    rng = np.random.default_rng(seed)
    # Pareto radii with unit scale; only the ratio matters.
    r_u = rng.random(samples) ** (-1.0 / a)
    r_w = rng.random(samples) ** (-1.0 / a)
    gap = np.linalg.norm(_uniform_ball(rng, samples, d) - _uniform_ball(rng, samples, d), axis=1)
    return float(np.mean(gap <= r_w / r_u))


# ---------------------------------------------------------------- pair distances


def _check_pair_args(r, radius: float, d: int) -> np.ndarray:
    _odd_d(d)
    if radius <= 0:
        raise InvalidInputError(f'ball radius must be positive, got {radius!r}')
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0.0) or np.any(r > 2.0 * radius):
        raise InvalidInputError(f'distance must lie in [0, {2.0 * radius}]')
    return r


def pair_distance_pdf(r, radius: float, d: int):
    """Density of the distance between two uniform points in a d-ball (odd d)."""
    r = _check_pair_args(r, radius, d)
    x = r / radius
    total = sum(c * (1.0 - (x / 2.0) ** (m - d)) for c, m in _series_terms(d))
    out = _series_scale(d) * x ** (d - 1) / radius * total
    return float(out) if out.ndim == 0 else out


def pair_distance_cdf(r, radius: float, d: int):
    """CDF D(r) of the same distance; D(0) = 0, D(2R) = 1."""
    r = _check_pair_args(r, radius, d)
    x = r / radius
    total = sum(c * (x ** d / d - x ** m / (2 ** (m - d) * m)) for c, m in _series_terms(d))
    out = np.clip(_series_scale(d) * total, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def moment_integral(alpha: float, m: float, r0: Optional[float] = None) -> float:
    """E[(r_w/r_u)^m] for independent radii: finite-r0 closed form, or its r0 -> 0 limit when r0 is None."""
    a1 = alpha - 1.0
    if not abs(m) < a1:
        raise DomainError(f'|m|={abs(m)} must be below alpha-1={a1} for a finite moment')
    limit = a1 * a1 / (a1 * a1 - m * m)
    if r0 is None:
        return limit
    if not 0.0 < r0 < 0.5:
        raise InvalidInputError(f'r0 must lie in (0, 1/2), got {r0!r}')
    q = 2.0 * r0
    return limit * (1.0 - q ** (a1 - m)) * (1.0 - q ** (a1 + m)) / (1.0 - q ** a1) ** 2


# ---------------------------------------------------------------- paths


def expected_paths(n: int, k: int, z: float) -> float:
    """E[a_k] = C(n-2, k-1) z^k (k-1)! directed k-paths between two fixed vertices."""
    if int(k) != k or not 1 <= k <= n - 1:
        raise InvalidInputError(f'k must be an integer in [1, {n - 1}], got {k!r}')
    if not 0.0 < z < 1.0:
        raise InvalidInputError(f'z must lie in (0, 1), got {z!r}')
    return math.exp(gammaln(n - 1.0) - gammaln(n - k) + k * math.log(z))


def path_threshold_k(n: int, z: float) -> Optional[int]:
    """Smallest k with E[a_k] >= 1, or None if no path length reaches one expected path."""
    for k in range(1, n):
        if gammaln(n - 1.0) - gammaln(n - k) + k * math.log(z) >= 0.0:
            return k
        if (n - 1 - k) * z < 1.0:
            # E[a_k] only decreases from here on.
            return None
    return None


# ---------------------------------------------------------------- report


def theory_report(n: int, alpha: float, d: int, max_path_k: int = 10, seed: int = 0) -> TheoryReport:
    """Assemble every prediction; unavailable constants are marked instead of raising."""
    law = _model_law(n, alpha, d)
    z = edge_prob_exact(n, alpha, d)
    constant: Optional[float] = None
    available = d % 2 == 1
    fallback: Optional[float] = None
    if available:
        try:
            constant = clustering_constant(alpha, d)
        except DomainError as exc:
            logger.warning('theory.theory_report: %s', exc)
            available = False
    expected = clustering_expected(alpha, d, seed=seed)
    if not available:
        fallback = expected if d % 2 == 0 else clustering_expected(alpha, d, method='monte_carlo', seed=seed)
    lower, upper = expected_type1_bounds(n, alpha, d)
    top = min(max_path_k, n - 1)
    report = TheoryReport(
        n=n,
        alpha=alpha,
        d=d,
        beta=beta_of(alpha, d),
        r0=law.r0,
        eta=law.eta,
        z_exact=z,
        z_asymptotic=edge_prob_asymptotic(n, alpha, d),
        z_error_bound=z_error_bound(n, alpha, d),
        expected_edges=n * (n - 1) * z,
        indegree_exponent=indegree_exponent(alpha, d),
        clustering_constant=constant,
        clustering_available=available,
        clustering_fallback=fallback,
        clustering_expected=expected,
        clustering_limit_alpha_inf=clustering_limit(d),
        reciprocity_limit=reciprocity_limit(alpha, d),
        reciprocity_exact=reciprocity_exact(n, alpha, d),
        expected_type1_lower=lower,
        expected_type1_upper=upper,
        expected_paths={k: expected_paths(n, k, z) for k in range(1, top + 1)},
        path_threshold_k=path_threshold_k(n, z),
    )
    logger.info('theory.theory_report: n=%d alpha=%s d=%d z=%.6g', n, alpha, d, z)
    return report
