"""DRGG construction: seeded point sampling and the two edge builders.

Edge rule: u -> v iff u != v and torus_distance(x_v, x_u) <= r_v, i.e. v's in-neighbours
are the points inside v's own ball. ``build_edges_naive`` is the O(n^2) reference;
``build_edges_grid`` answers the same ball queries through a cell list and must return
the identical graph.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import sparse

from errors import GraphIntegrityError, InvalidInputError, ModelInfeasibleError
from geometry import RadiusLaw, TorusPoint, min_radius, within_radius
from utils import settings
from utils.cell_grid import CellGrid, cells_per_axis

logger = logging.getLogger(__name__)

# Naive builder: target rows scanned per block against all n points.
_NAIVE_PAIR_BUDGET = 4_000_000


class RadiusMode(str, Enum):
    pareto = 'pareto'
    fixed_r0 = 'fixed_r0'


class ModelParams(BaseModel):
    """Full description of one G(n, alpha, d) instance.

    Construction raises ModelInfeasibleError when r0 >= 1/2 or, in pareto mode, alpha <= d+1.
    """

    model_config = ConfigDict(frozen=True, use_enum_values=False)

    n: int = Field(ge=2)
    alpha: float
    d: int = Field(ge=1)
    seed: int = Field(default=0, ge=0, le=2 ** 64 - 1)
    radius_mode: RadiusMode = RadiusMode.pareto

    @model_validator(mode='after')
    def _check_feasible(self) -> 'ModelParams':
        if self.radius_mode == RadiusMode.pareto and not self.alpha > self.d + 1:
            raise ModelInfeasibleError(f'alpha={self.alpha} must exceed d+1={self.d + 1} in pareto mode')
        min_radius(self.n, self.d)
        return self

    @property
    def r0(self) -> float:
        return min_radius(self.n, self.d)

    def radius_law(self) -> RadiusLaw:
        return RadiusLaw.build(self.alpha, self.r0, self.d)


@dataclass(frozen=True)
class TorusPointSet:
    """Geometric realization: positions (n x d, each row in [0,1)^d) and radii in [r0, 1/2]."""

    params: ModelParams
    positions: np.ndarray
    radii: np.ndarray

    def __post_init__(self) -> None:
        positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        radii = np.ascontiguousarray(self.radii, dtype=np.float64)
        n, d = self.params.n, self.params.d
        if positions.shape != (n, d):
            raise GraphIntegrityError(f'positions shape {positions.shape} != ({n}, {d})')
        if radii.shape != (n,):
            raise GraphIntegrityError(f'radii shape {radii.shape} != ({n},)')
        if not np.all((positions >= 0.0) & (positions < 1.0)):
            bad = int(np.argwhere(~((positions >= 0.0) & (positions < 1.0)))[0][0])
            raise GraphIntegrityError(f'position of vertex {bad} outside [0, 1)^d')
        r0 = self.params.r0
        outside = ~((radii >= r0) & (radii <= 0.5))
        if outside.any():
            bad = int(np.flatnonzero(outside)[0])
            raise GraphIntegrityError(f'radius {radii[bad]!r} of vertex {bad} outside [{r0!r}, 0.5]')
        positions.setflags(write=False)
        radii.setflags(write=False)
        object.__setattr__(self, 'positions', positions)
        object.__setattr__(self, 'radii', radii)

    @property
    def n(self) -> int:
        return self.params.n

    @property
    def r0(self) -> float:
        return self.params.r0

    def point(self, v: int) -> TorusPoint:
        return TorusPoint(tuple(self.positions[v]))


def _freeze(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiGraph:
    """Immutable simple digraph stored as sorted CSR arrays in both directions.

    ``out_indices[out_indptr[u]:out_indptr[u+1]]`` are u's successors,
    ``in_indices[in_indptr[v]:in_indptr[v+1]]`` are v's predecessors, both ascending.
    """

    n: int
    out_indptr: np.ndarray
    out_indices: np.ndarray
    in_indptr: np.ndarray
    in_indices: np.ndarray
    labels: Optional[Tuple[str, ...]] = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        sources: Iterable[int],
        targets: Iterable[int],
        labels: Optional[Sequence[str]] = None,
    ) -> 'DiGraph':
        """Canonical constructor: drops self-loops and duplicates, sorts adjacency."""
        if n < 0:
            raise InvalidInputError(f'vertex count must be >= 0, got {n}')
        src = np.asarray(list(sources) if not isinstance(sources, np.ndarray) else sources, dtype=np.int64)
        dst = np.asarray(list(targets) if not isinstance(targets, np.ndarray) else targets, dtype=np.int64)
        if src.shape != dst.shape:
            raise InvalidInputError('sources and targets differ in length')
        if src.size and (src.min() < 0 or dst.min() < 0 or src.max() >= n or dst.max() >= n):
            raise InvalidInputError(f'edge endpoint outside [0, {n})')
        if labels is not None and len(labels) != n:
            raise InvalidInputError(f'{len(labels)} labels for {n} vertices')
        keep = src != dst
        src, dst = src[keep], dst[keep]
        width = max(n, 1)
        out_keys = np.unique(src * width + dst)
        out_src, out_dst = np.divmod(out_keys, width)
        in_keys = np.unique(out_dst * width + out_src)
        in_dst, in_src = np.divmod(in_keys, width)
        out_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(out_src, minlength=n), out=out_indptr[1:])
        in_indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(in_dst, minlength=n), out=in_indptr[1:])
        return cls(
            n=int(n),
            out_indptr=_freeze(out_indptr),
            out_indices=_freeze(out_dst.astype(np.int64)),
            in_indptr=_freeze(in_indptr),
            in_indices=_freeze(in_src.astype(np.int64)),
            labels=tuple(str(x) for x in labels) if labels is not None else None,
        )

    @property
    def edge_count(self) -> int:
        return int(self.out_indices.size)

    def out_degree(self) -> np.ndarray:
        return np.diff(self.out_indptr)

    def in_degree(self) -> np.ndarray:
        return np.diff(self.in_indptr)

    def successors(self, u: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[u]:self.out_indptr[u + 1]]

    def predecessors(self, v: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[v]:self.in_indptr[v + 1]]

    def edges(self) -> Tuple[np.ndarray, np.ndarray]:
        """(sources, targets) in lexicographic order."""
        return np.repeat(np.arange(self.n, dtype=np.int64), self.out_degree()), self.out_indices.copy()

    def edge_list(self) -> List[Tuple[int, int]]:
        src, dst = self.edges()
        return list(zip(src.tolist(), dst.tolist()))

    def has_edge(self, u: int, v: int) -> bool:
        succ = self.successors(u)
        i = int(np.searchsorted(succ, v))
        return i < succ.size and int(succ[i]) == v

    def label(self, v: int):
        return self.labels[v] if self.labels is not None else int(v)

    def to_sparse(self) -> sparse.csr_matrix:
        """Adjacency A with A[u, v] = 1 iff u -> v (int64 so products count paths)."""
        data = np.ones(self.edge_count, dtype=np.int64)
        return sparse.csr_matrix((data, self.out_indices, self.out_indptr), shape=(self.n, self.n))

    def subgraph(self, vertices: Sequence[int]) -> 'DiGraph':
        """Induced subgraph on ``vertices`` (renumbered in ascending order), labels carried."""
        keep = np.unique(np.asarray(vertices, dtype=np.int64))
        remap = np.full(self.n, -1, dtype=np.int64)
        remap[keep] = np.arange(keep.size)
        src, dst = self.edges()
        mask = (remap[src] >= 0) & (remap[dst] >= 0)
        labels = [self.labels[v] for v in keep] if self.labels is not None else None
        return DiGraph.from_edges(int(keep.size), remap[src[mask]], remap[dst[mask]], labels=labels)

    def same_edges(self, other: 'DiGraph') -> bool:
        return (
            self.n == other.n
            and np.array_equal(self.out_indptr, other.out_indptr)
            and np.array_equal(self.out_indices, other.out_indices)
        )


def sample_points(params: ModelParams) -> TorusPointSet:
    """Draw all n positions, then all n radii, from one stream seeded by ``params.seed``."""
    rng = np.random.default_rng(params.seed)
    positions = rng.random((params.n, params.d))
    if params.radius_mode == RadiusMode.fixed_r0:
        radii = np.full(params.n, params.r0)
    else:
        radii = params.radius_law().sample(rng, params.n)
    logger.debug('generator.sample_points: n=%d d=%d mode=%s', params.n, params.d, params.radius_mode.value)
    return TorusPointSet(params=params, positions=positions, radii=radii)


def _positions_radii(pts) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(pts, TorusPointSet):
        return pts.positions, pts.radii
    positions, radii = pts
    positions = np.atleast_2d(np.asarray(positions, dtype=np.float64))
    return positions, np.asarray(radii, dtype=np.float64)


def build_edges_naive(pts) -> DiGraph:
    """Reference O(n^2) builder.

    ``pts`` is a TorusPointSet or a raw ``(positions, radii)`` pair (small hand fixtures).
    """
    positions, radii = _positions_radii(pts)
    n = positions.shape[0] if positions.size else 0
    if n < 2:
        return DiGraph.from_edges(n, [], [])
    block = max(1, _NAIVE_PAIR_BUDGET // n)
    sources: List[np.ndarray] = []
    targets: List[np.ndarray] = []
    for start in range(0, n, block):
        rows = np.arange(start, min(start + block, n))
        mask = within_radius(positions[rows][:, np.newaxis, :], positions[np.newaxis, :, :], radii[rows][:, np.newaxis])
        mask[np.arange(rows.size), rows] = False
        r, c = np.nonzero(mask)
        sources.append(c)
        targets.append(rows[r])
    return DiGraph.from_edges(n, np.concatenate(sources), np.concatenate(targets))


def build_edges_grid(pts, workers: Optional[int] = None, max_cells_per_axis: Optional[int] = None) -> DiGraph:
    """Cell-list builder; same edge set as ``build_edges_naive`` for any worker count."""
    positions, radii = _positions_radii(pts)
    n = positions.shape[0] if positions.size else 0
    if n < 2:
        return DiGraph.from_edges(n, [], [])
    d = positions.shape[1]
    r_min = float(radii.min())
    cap = max_cells_per_axis or settings.grid_max_cells_per_axis()
    grid = CellGrid(positions, cells_per_axis(r_min, d, cap))
    units = list(grid.plan(radii))

    def run(unit):
        kind, queries, reach = unit
        if kind == 'scan':
            return grid.scan_block(queries, radii[queries])
        return grid.query_block(queries, radii[queries], reach)

    workers = workers or settings.workers()
    if workers > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, units))
    else:
        parts = [run(unit) for unit in units]
    logger.debug('generator.build_edges_grid: n=%d m=%d units=%d workers=%d', n, grid.m, len(units), workers)
    if not parts:
        return DiGraph.from_edges(n, [], [])
    src = np.concatenate([p[0] for p in parts])
    dst = np.concatenate([p[1] for p in parts])
    return DiGraph.from_edges(n, src, dst)


def generate(params: ModelParams, workers: Optional[int] = None) -> Tuple[TorusPointSet, DiGraph]:
    """Sample a point set and build its DRGG with the grid builder."""
    pts = sample_points(params)
    g = build_edges_grid(pts, workers=workers)
    logger.info(
        'generator.generate: n=%d alpha=%s d=%d seed=%d mode=%s edges=%d',
        params.n, params.alpha, params.d, params.seed, params.radius_mode.value, g.edge_count,
    )
    return pts, g
