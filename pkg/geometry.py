"""Torus metric, d-ball constants and the Pareto radius law of the DRGG model.

Points live on the unit d-torus [0,1)^d (side length fixed to 1). Every vertex v gets a
radius r_v drawn from f(r) = eta / r^alpha on [r0, 1/2], where r0 = (ln n / (V_d n))^(1/d)
is the connectivity radius and eta normalizes the density. Logarithms are natural.
"""

import logging
import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

from errors import InvalidInputError, ModelInfeasibleError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TorusPoint:
    """Point on the unit torus; every coordinate in [0, 1)."""

    coords: tuple

    def __post_init__(self) -> None:
        coords = tuple(float(c) for c in self.coords)
        if not coords:
            raise InvalidInputError('TorusPoint needs dimension d >= 1')
        for c in coords:
            if not (0.0 <= c < 1.0):
                raise InvalidInputError(f'torus coordinate {c!r} outside [0, 1)')
        object.__setattr__(self, 'coords', coords)

    @property
    def d(self) -> int:
        return len(self.coords)


PointLike = Union[TorusPoint, Sequence[float], np.ndarray]


def _as_array(p: PointLike) -> np.ndarray:
    if isinstance(p, TorusPoint):
        return np.asarray(p.coords, dtype=np.float64)
    return np.asarray(p, dtype=np.float64)


def torus_sq_distances(center: np.ndarray, others: np.ndarray) -> np.ndarray:
    """Squared minimum-image distances between ``center`` and each row of ``others``.

    Broadcasts over leading axes. Coordinates are summed in axis order with explicit
    adds, so every caller (naive scan, cell grid, public metric) performs the same
    floating point operations for the same pair.
    """
    diff = np.abs(others - center)
    diff = np.minimum(diff, 1.0 - diff)
    sq = diff[..., 0] * diff[..., 0]
    for axis in range(1, diff.shape[-1]):
        sq = sq + diff[..., axis] * diff[..., axis]
    return sq


def within_radius(center: np.ndarray, others: np.ndarray, radius) -> np.ndarray:
    """Boolean mask: torus distance from ``center`` to each row of ``others`` is <= radius.

    Ties count as inside.
    """
    radius = np.asarray(radius, dtype=np.float64)
    return torus_sq_distances(center, others) <= radius * radius


def torus_distance(p: PointLike, q: PointLike) -> float:
    """Euclidean norm of the per-coordinate minimum-image differences."""
    a = _as_array(p)
    b = _as_array(q)
    if a.ndim != 1 or b.ndim != 1 or a.shape != b.shape:
        raise InvalidInputError(f'dimension mismatch: {a.shape} vs {b.shape}')
    if a.size == 0:
        raise InvalidInputError('points need dimension d >= 1')
    return float(math.sqrt(torus_sq_distances(a, b[np.newaxis, :])[0]))


def _check_dim(d: int) -> None:
    if int(d) != d or d < 1:
        raise InvalidInputError(f'dimension must be an integer >= 1, got {d!r}')


def ball_volume(d: int) -> float:
    """V_d = pi^(d/2) / Gamma(d/2 + 1)."""
    _check_dim(d)
    return float(math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)))


def sphere_surface(d: int) -> float:
    """S_{d-1} = 2 pi^(d/2) / Gamma(d/2), the surface of the unit ball in R^d (S/V = d)."""
    _check_dim(d)
    return float(2.0 * math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d)))


def _raw_min_radius(n: int, d: int) -> float:
    return (math.log(n) / (ball_volume(d) * n)) ** (1.0 / d)


def min_feasible_n(d: int, limit: int = 10 ** 7) -> int:
    """Smallest n >= 2 whose connectivity radius lies below 1/2."""
    _check_dim(d)
    if _raw_min_radius(2, d) < 0.5:
        return 2
    # ln(n)/n decreases for n >= 3, so feasibility is monotone from there on.
    lo, hi = 2, 3
    while _raw_min_radius(hi, d) >= 0.5:
        lo, hi = hi, hi * 2
        if hi > limit:
            raise ModelInfeasibleError(f'no feasible n below {limit} for d={d}')
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _raw_min_radius(mid, d) < 0.5:
            hi = mid
        else:
            lo = mid
    return hi


def min_radius(n: int, d: int) -> float:
    """Connectivity radius r0 = (ln n / (V_d n))^(1/d)."""
    _check_dim(d)
    if int(n) != n or n < 2:
        raise InvalidInputError(f'n must be an integer >= 2, got {n!r}')
    r0 = _raw_min_radius(int(n), int(d))
    if r0 >= 0.5:
        need = min_feasible_n(d)
        raise ModelInfeasibleError(
            f'r0={r0:.4f} >= 1/2 for n={n}, d={d}; the smallest feasible n is {need}',
            min_feasible_n=need,
        )
    return r0


def pareto_normalizer(alpha: float, r0: float) -> float:
    """eta = (alpha-1) r0^(alpha-1) / (1 - (2 r0)^(alpha-1)), making f integrate to 1 on [r0, 1/2]."""
    if not (0.0 < r0 < 0.5):
        raise InvalidInputError(f'r0 must lie in (0, 1/2), got {r0!r}')
    if alpha <= 1.0:
        raise InvalidInputError(f'alpha must exceed 1, got {alpha!r}')
    return (alpha - 1.0) * r0 ** (alpha - 1.0) / (1.0 - (2.0 * r0) ** (alpha - 1.0))


@dataclass(frozen=True)
class RadiusLaw:
    """Truncated Pareto density f(r) = eta / r^alpha on [r0, 1/2]."""

    alpha: float
    r0: float
    eta: float
    d: int

    @classmethod
    def build(cls, alpha: float, r0: float, d: int) -> 'RadiusLaw':
        _check_dim(d)
        return cls(alpha=float(alpha), r0=float(r0), eta=pareto_normalizer(alpha, r0), d=int(d))

    @classmethod
    def for_model(cls, n: int, alpha: float, d: int) -> 'RadiusLaw':
        return cls.build(alpha, min_radius(n, d), d)

    @property
    def beta(self) -> float:
        """(alpha - 1) / d; the indegree tail decays like k^-(beta + 1)."""
        return (self.alpha - 1.0) / self.d

    def coverage(self, r):
        """Torus volume V_d r^d of a ball of radius r, i.e. the chance a uniform point falls inside.

        Exact up to r = 1/2, where the ball still does not wrap onto itself.
        """
        return ball_volume(self.d) * np.power(np.asarray(r, dtype=np.float64), self.d)

    def pdf(self, r):
        r = np.asarray(r, dtype=np.float64)
        inside = (r >= self.r0) & (r <= 0.5)
        return np.where(inside, self.eta * np.power(np.where(inside, r, 1.0), -self.alpha), 0.0)

    def cdf(self, r):
        """F(r) = eta/(alpha-1) (r0^(1-alpha) - r^(1-alpha)), clamped to [0, 1]."""
        r = np.clip(np.asarray(r, dtype=np.float64), self.r0, 0.5)
        a1 = self.alpha - 1.0
        scale = 1.0 - (2.0 * self.r0) ** a1
        # Written relative to r0 so large alpha does not overflow r0^(1-alpha).
        return np.clip((1.0 - np.power(self.r0 / r, a1)) / scale, 0.0, 1.0)

    def survival(self, r):
        """P[R >= r]: 1 below r0, 0 above 1/2."""
        r = np.asarray(r, dtype=np.float64)
        return np.where(r <= self.r0, 1.0, np.where(r > 0.5, 0.0, 1.0 - self.cdf(r)))

    def ppf(self, u):
        """Inverse CDF, vectorized; r0 at u=0 and 1/2 at u=1."""
        u = np.asarray(u, dtype=np.float64)
        a1 = self.alpha - 1.0
        scale = 1.0 - (2.0 * self.r0) ** a1
        r = self.r0 * np.power(1.0 - u * scale, -1.0 / a1)
        return np.clip(r, self.r0, 0.5)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.ppf(rng.random(size))


def sample_radius(law: RadiusLaw, u: float) -> float:
    """Radius r in [r0, 1/2] with F(r) = u (exact inverse transform)."""
    if not (0.0 <= u <= 1.0):
        raise InvalidInputError(f'u must lie in [0, 1], got {u!r}')
    return float(law.ppf(u))
