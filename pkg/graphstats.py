"""Empirical statistics of a directed graph (generated or ingested).

Counting is done with sparse matrix products over the adjacency A (A[u, v] = 1 iff
u -> v); shortest paths use scipy's unweighted BFS from batches of sources.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field, field_serializer, field_validator, model_validator
from scipy import sparse, stats
from scipy.sparse import csgraph

from errors import InvalidInputError, UndefinedStatisticError
from generator import DiGraph
from utils import settings

logger = logging.getLogger(__name__)

# Distance matrix entries held per BFS batch.
_BFS_BUDGET = 4_000_000


class PathMode(str, Enum):
    directed = 'directed'
    undirected_projection = 'undirected_projection'


class DegreeHistogram(BaseModel):
    """Vertex count per degree. Serialized as ``[[k, count], ...]`` ascending in k."""

    counts: Dict[int, int]
    total: int = Field(ge=0)

    @field_validator('counts', mode='before')
    @classmethod
    def _accept_pairs(cls, value):
        if isinstance(value, (list, tuple)):
            return {int(k): int(c) for k, c in value}
        return value

    @model_validator(mode='after')
    def _check_mass(self) -> 'DegreeHistogram':
        if any(k < 0 or c < 0 for k, c in self.counts.items()):
            raise ValueError('degrees and counts must be non-negative')
        if sum(self.counts.values()) != self.total:
            raise ValueError(f'histogram mass {sum(self.counts.values())} != total {self.total}')
        return self

    @field_serializer('counts')
    def _as_pairs(self, counts: Dict[int, int]) -> List[List[int]]:
        return [[int(k), int(counts[k])] for k in sorted(counts)]

    @classmethod
    def from_degrees(cls, degrees: Sequence[int]) -> 'DegreeHistogram':
        degrees = np.asarray(degrees, dtype=np.int64)
        if degrees.size == 0:
            return cls(counts={}, total=0)
        binned = np.bincount(degrees)
        ks = np.flatnonzero(binned)
        return cls(counts={int(k): int(binned[k]) for k in ks}, total=int(degrees.size))

    def degrees(self) -> np.ndarray:
        """Expand back to one degree per vertex, ascending."""
        ks = sorted(self.counts)
        return np.repeat(np.asarray(ks, dtype=np.int64), [self.counts[k] for k in ks])

    def mass(self) -> int:
        """Sum of k * count(k), i.e. the edge count for a degree histogram."""
        return int(sum(k * c for k, c in self.counts.items()))

    def mean(self) -> float:
        return self.mass() / self.total if self.total else 0.0

    def pmf(self, size: Optional[int] = None) -> np.ndarray:
        """Dense empirical pmf indexed by k (length ``size`` or max degree + 1)."""
        top = max(self.counts) + 1 if self.counts else 1
        out = np.zeros(max(size or 0, top))
        for k, c in self.counts.items():
            out[k] = c
        return out / self.total if self.total else out


class TriangleCensus(BaseModel):
    """Labeled triangle counts.

    type1: ordered (u, v, w) with v->u, w->u, v->w (apex u).
    type2: ordered directed 3-cycles u->v->w->u, each cycle counted once per rotation.
    """

    type1_labeled: int = Field(ge=0)
    type2_labeled: int = Field(ge=0)


class Hub(BaseModel):
    vertex: Union[int, str]
    indegree: int = Field(ge=0)


@dataclass(frozen=True)
class PathStats:
    diameter: int
    avg_path_length: float
    reachable_fraction: float
    sources: int
    is_lower_bound: bool


class StatsReport(BaseModel):
    """Every empirical statistic of one graph; field order is the serialized order."""

    n: int
    edge_count: int
    in_hist: DegreeHistogram
    out_hist: DegreeHistogram
    triangles: TriangleCensus
    clustering_in_excl: Optional[float] = None
    clustering_in_all: float = 0.0
    clustering_undirected: float = 0.0
    reciprocity: Optional[float] = None
    path_mode: PathMode = PathMode.directed
    diameter: Optional[int] = None
    avg_path_length: Optional[float] = None
    reachable_pair_fraction: float = 0.0
    path_sources: int = 0
    diameter_is_lower_bound: bool = False
    hubs: List[Hub] = Field(default_factory=list)


def degree_histograms(g: DiGraph) -> Tuple[DegreeHistogram, DegreeHistogram]:
    """(indegree histogram, outdegree histogram)."""
    return DegreeHistogram.from_degrees(g.in_degree()), DegreeHistogram.from_degrees(g.out_degree())


def _type1_per_apex(a: sparse.csr_matrix) -> np.ndarray:
    # t_u = sum_v A[v,u] * (A A)[v,u]: in-neighbour v reaching u through another in-neighbour w.
    return np.asarray(a.multiply(a @ a).sum(axis=0)).ravel().astype(np.int64)


def count_triangles(g: DiGraph) -> TriangleCensus:
    a = g.to_sparse()
    type1 = int(_type1_per_apex(a).sum())
    type2 = int(a.multiply((a @ a).T).sum())
    return TriangleCensus(type1_labeled=type1, type2_labeled=type2)


def brute_force_triangles(g: DiGraph) -> TriangleCensus:
    """O(n^3) oracle over every ordered triple; meant for n of a few hundred."""
    m = g.to_sparse().toarray().astype(bool)
    # x[u, v, w] = (v->u) & (w->u) & (v->w)
    x = m.T[:, :, None] & m.T[:, None, :] & m[None, :, :]
    # y[u, v, w] = (u->v) & (v->w) & (w->u)
    y = m[:, :, None] & m[None, :, :] & m.T[:, None, :]
    return TriangleCensus(type1_labeled=int(x.sum()), type2_labeled=int(y.sum()))


def cycles_without_type1(g: DiGraph) -> int:
    """Vertex sets carrying a directed 3-cycle but no type-1 pattern.

    A cycle set has a type-1 pattern exactly when one of its three pairs is reciprocal, so
    the offending sets are the 3-cycles of B, A without its reciprocated entries, each
    seen three times in trace(B^3).
    """
    a = g.to_sparse()
    b = (a - a.multiply(a.T)).tocsr()
    b.eliminate_zeros()
    violations = int(b.multiply((b @ b).T).sum()) // 3
    if violations:
        logger.warning('graphstats.cycles_without_type1: %d cycle sets lack a type-1 pattern', violations)
    return violations


def clustering_in(g: DiGraph) -> Tuple[Optional[float], float, Dict[int, float]]:
    """Directed in-clustering c_u = t_u / (d_u (d_u - 1)) with d_u the indegree.

    Returns (mean over vertices with indegree >= 2 or None if there are none,
    sum over all vertices / n with c_u = 0 below indegree 2, per-vertex map).
    """
    if g.n == 0:
        return None, 0.0, {}
    t = _type1_per_apex(g.to_sparse())
    deg = g.in_degree()
    eligible = np.flatnonzero(deg >= 2)
    c = t[eligible] / (deg[eligible] * (deg[eligible] - 1.0))
    per_vertex = {int(v): float(x) for v, x in zip(eligible, c)}
    excl = float(c.mean()) if eligible.size else None
    return excl, float(c.sum() / g.n), per_vertex


def undirected_projection(g: DiGraph) -> sparse.csr_matrix:
    """Symmetric 0/1 adjacency with every directed edge made bidirectional."""
    a = g.to_sparse()
    s = ((a + a.T) > 0).astype(np.int64)
    return sparse.csr_matrix(s)


def undirected_clustering(g: DiGraph) -> Tuple[float, Optional[float], np.ndarray]:
    """Local clustering on the undirected projection.

    Returns (mean over all vertices with 0 below degree 2, mean over degree >= 2 or None,
    per-vertex coefficients).
    """
    if g.n == 0:
        return 0.0, None, np.zeros(0)
    s = undirected_projection(g)
    deg = np.asarray(s.sum(axis=1)).ravel()
    # Orient each edge from lower to higher (degree, id) rank; every triangle then appears
    # once as a -> b -> c with a -> c.
    rank = np.empty(g.n, dtype=np.int64)
    rank[np.lexsort((np.arange(g.n), deg))] = np.arange(g.n)
    coo = sparse.triu(s, k=1).tocoo()
    lo = np.where(rank[coo.row] < rank[coo.col], coo.row, coo.col)
    hi = np.where(rank[coo.row] < rank[coo.col], coo.col, coo.row)
    low = sparse.csr_matrix((np.ones(lo.size, dtype=np.int64), (lo, hi)), shape=(g.n, g.n))
    ends = (low @ low).multiply(low)
    middles = (low.T @ low).multiply(low)
    tri = (
        np.asarray(ends.sum(axis=1)).ravel()
        + np.asarray(ends.sum(axis=0)).ravel()
        + np.asarray(middles.sum(axis=1)).ravel()
    )
    coeff = np.zeros(g.n)
    eligible = deg >= 2
    coeff[eligible] = 2.0 * tri[eligible] / (deg[eligible] * (deg[eligible] - 1.0))
    excl = float(coeff[eligible].mean()) if eligible.any() else None
    return float(coeff.mean()), excl, coeff


def reciprocity(g: DiGraph) -> float:
    """Fraction of directed edges whose reverse edge also exists."""
    if g.edge_count == 0:
        raise UndefinedStatisticError('reciprocity is undefined on a graph without edges')
    a = g.to_sparse()
    return float(a.multiply(a.T).sum()) / g.edge_count


def shortest_path_stats(
    g: DiGraph,
    mode: PathMode = PathMode.directed,
    sample_size: Optional[int] = None,
    exact_threshold: Optional[int] = None,
    seed: int = 0,
) -> PathStats:
    """Diameter, mean finite distance and reachable pair fraction.

    BFS runs from every vertex when ``sample_size`` is None and n is at most the exact
    threshold; otherwise from ``sample_size`` (default DRGG_PATH_SAMPLES) uniformly
    drawn sources, and the diameter is only a lower bound.
    """
    mode = PathMode(mode)
    n = g.n
    if n < 2:
        raise InvalidInputError('path statistics need n >= 2')
    threshold = exact_threshold if exact_threshold is not None else settings.exact_path_threshold()
    if sample_size is None and n <= threshold:
        sources = np.arange(n)
    else:
        k = sample_size if sample_size is not None else settings.path_samples()
        if k < 1:
            raise InvalidInputError(f'sample size must be >= 1, got {k}')
        if k >= n:
            sources = np.arange(n)
        else:
            sources = np.sort(np.random.default_rng(seed).choice(n, size=k, replace=False))
    sampled = sources.size < n
    a = g.to_sparse()
    directed = mode == PathMode.directed
    batch = max(1, _BFS_BUDGET // n)
    diameter = 0
    total = 0.0
    finite = 0
    for start in range(0, sources.size, batch):
        chunk = sources[start:start + batch]
        dist = csgraph.shortest_path(a, method='D', directed=directed, unweighted=True, indices=chunk)
        dist[np.arange(chunk.size), chunk] = np.inf
        reach = np.isfinite(dist)
        count = int(reach.sum())
        if count:
            finite += count
            total += float(dist[reach].sum())
            diameter = max(diameter, int(dist[reach].max()))
    if finite == 0:
        raise UndefinedStatisticError('no vertex pair is connected by a path')
    if sampled:
        logger.warning(
            'graphstats.shortest_path_stats: n=%d sampled %d sources; diameter %d is a lower bound',
            n, sources.size, diameter,
        )
    return PathStats(
        diameter=diameter,
        avg_path_length=total / finite,
        reachable_fraction=finite / float(sources.size * (n - 1)),
        sources=int(sources.size),
        is_lower_bound=sampled,
    )


def top_hubs(g: DiGraph, k: int) -> List[Hub]:
    """The k largest indegrees, ties by ascending vertex id; labels used when present."""
    if k < 1:
        raise InvalidInputError(f'k must be >= 1, got {k}')
    deg = g.in_degree()
    order = np.lexsort((np.arange(g.n), -deg))[:k]
    return [Hub(vertex=g.label(v), indegree=int(deg[v])) for v in order]


def largest_component(g: DiGraph) -> DiGraph:
    """Induced subgraph on the largest weakly connected component (smallest label on ties)."""
    if g.n == 0:
        return g
    _, comp = csgraph.connected_components(g.to_sparse(), directed=True, connection='weak')
    sizes = np.bincount(comp)
    keep = np.flatnonzero(comp == int(np.argmax(sizes)))
    if keep.size < g.n:
        logger.info('graphstats.largest_component: kept %d of %d vertices', keep.size, g.n)
    return g.subgraph(keep)


def fit_log_trend(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float, float]:
    """Least-squares y = slope * ln(x) + intercept; returns (slope, intercept, max |residual|)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.size < 2 or xs.size != ys.size:
        raise InvalidInputError('need at least two (x, y) points of equal length')
    fit = stats.linregress(np.log(xs), ys)
    resid = ys - (fit.slope * np.log(xs) + fit.intercept)
    return float(fit.slope), float(fit.intercept), float(np.abs(resid).max())


def compute_stats(
    g: DiGraph,
    path_mode: PathMode = PathMode.directed,
    path_samples: Optional[int] = None,
    exact_threshold: Optional[int] = None,
    hubs_k: Optional[int] = None,
    seed: int = 0,
) -> StatsReport:
    """Assemble a StatsReport; undefined statistics are left empty instead of raising."""
    in_hist, out_hist = degree_histograms(g)
    excl, all_, _ = clustering_in(g)
    undirected, _, _ = undirected_clustering(g)
    try:
        recip = reciprocity(g)
    except UndefinedStatisticError:
        logger.warning('graphstats.compute_stats: reciprocity undefined (no edges)')
        recip = None
    paths: Optional[PathStats] = None
    if g.n >= 2:
        try:
            paths = shortest_path_stats(g, path_mode, path_samples, exact_threshold, seed)
        except UndefinedStatisticError:
            logger.warning('graphstats.compute_stats: no reachable pairs; path fields left empty')
    report = StatsReport(
        n=g.n,
        edge_count=g.edge_count,
        in_hist=in_hist,
        out_hist=out_hist,
        triangles=count_triangles(g),
        clustering_in_excl=excl,
        clustering_in_all=all_,
        clustering_undirected=undirected,
        reciprocity=recip,
        path_mode=PathMode(path_mode),
        diameter=paths.diameter if paths else None,
        avg_path_length=paths.avg_path_length if paths else None,
        reachable_pair_fraction=paths.reachable_fraction if paths else 0.0,
        path_sources=paths.sources if paths else 0,
        diameter_is_lower_bound=paths.is_lower_bound if paths else False,
        hubs=top_hubs(g, hubs_k or settings.top_hubs()) if g.n else [],
    )
    logger.info(
        'graphstats.compute_stats: n=%d edges=%d type1=%d reciprocity=%s',
        g.n, g.edge_count, report.triangles.type1_labeled, recip,
    )
    return report


def triangle_ratio(type1_labeled: int, n: int) -> float:
    """type1_labeled / (n ln^2 n), the quantity that stays bounded as n grows."""
    return type1_labeled / (n * math.log(n) ** 2)
