"""Cell list over the unit torus for variable-radius ball queries.

Points are bucketed into m^d cubic cells of side 1/m (cell indices wrap around the
torus). A query for vertex v with radius r_v visits the cells within floor(r_v * m) + 1
steps along every axis and keeps the candidates that pass the shared
``geometry.within_radius`` predicate, so results match a brute-force scan exactly.
"""

import itertools
import logging
import math
from typing import Iterator, List, Tuple

import numpy as np

from geometry import within_radius

logger = logging.getLogger(__name__)

# Candidate pairs materialised per numpy batch.
_PAIR_BUDGET = 4_000_000


def cells_per_axis(r0: float, d: int, max_cells_per_axis: int = 64) -> int:
    """Number of cells per axis: side >= max(r0, sqrt(d)/2/64), never more than the cap."""
    side = max(r0, math.sqrt(d) / 2.0 / 64.0)
    return max(1, min(int(math.floor(1.0 / side)), max_cells_per_axis))


class CellGrid:
    """Sorted cell list: ``order`` holds point ids grouped by cell, ``starts``/``counts`` index it."""

    def __init__(self, positions: np.ndarray, m: int) -> None:
        self.positions = positions
        self.n, self.d = positions.shape
        self.m = int(m)
        coords = np.minimum((positions * self.m).astype(np.int64), self.m - 1)
        self._strides = self.m ** np.arange(self.d, dtype=np.int64)
        self.cell_coords = coords
        cell_ids = coords @ self._strides
        self.order = np.argsort(cell_ids, kind='stable')
        self.counts = np.bincount(cell_ids, minlength=self.m ** self.d)
        self.starts = np.concatenate(([0], np.cumsum(self.counts)[:-1]))
        logger.debug('cell_grid: n=%d d=%d m=%d cells=%d', self.n, self.d, self.m, self.m ** self.d)

    def reach(self, radii: np.ndarray) -> np.ndarray:
        """Cells to visit along each axis on either side of the home cell.

        floor(a + b) - floor(a) <= floor(b) + 1 for any cell-scaled coordinate a, so this
        bound holds even when r * m lands on an integer.
        """
        return (np.floor(radii * self.m + 1e-9) + 1).astype(np.int64)

    def axis_offsets(self, reach: int) -> np.ndarray:
        """Distinct per-axis offsets for a reach; the whole axis once the ball wraps."""
        if 2 * reach + 1 >= self.m:
            return np.arange(self.m, dtype=np.int64)
        return np.arange(-reach, reach + 1, dtype=np.int64)

    def offset_count(self, reach: int) -> int:
        return len(self.axis_offsets(reach)) ** self.d

    def query_block(self, queries: np.ndarray, radii: np.ndarray, reach: int) -> Tuple[np.ndarray, np.ndarray]:
        """Return (sources, targets): every u != v with u inside v's ball, v in ``queries``.

        All queries in the block must share ``reach``.
        """
        sources: List[np.ndarray] = []
        targets: List[np.ndarray] = []
        home = self.cell_coords[queries]
        q_pos = self.positions[queries]
        axis = self.axis_offsets(reach)
        for offset in itertools.product(axis, repeat=self.d):
            nbr = np.mod(home + np.asarray(offset, dtype=np.int64), self.m) @ self._strides
            cnt = self.counts[nbr]
            total = int(cnt.sum())
            if total == 0:
                continue
            q_rep = np.repeat(np.arange(len(queries)), cnt)
            first = np.cumsum(cnt) - cnt
            within = np.arange(total, dtype=np.int64) - np.repeat(first, cnt)
            cand = self.order[np.repeat(self.starts[nbr], cnt) + within]
            mask = within_radius(q_pos[q_rep], self.positions[cand], radii[q_rep])
            v = queries[q_rep]
            mask &= cand != v
            sources.append(cand[mask])
            targets.append(v[mask])
        if not sources:
            empty = np.zeros(0, dtype=np.int64)
            return empty, empty
        return np.concatenate(sources), np.concatenate(targets)

    def scan_block(self, queries: np.ndarray, radii: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Brute-force the block against every point (used for balls covering most cells)."""
        mask = within_radius(
            self.positions[queries][:, np.newaxis, :],
            self.positions[np.newaxis, :, :],
            radii[:, np.newaxis],
        )
        mask[np.arange(len(queries)), queries] = False
        rows, cols = np.nonzero(mask)
        return cols.astype(np.int64), queries[rows].astype(np.int64)

    def plan(self, radii: np.ndarray) -> Iterator[Tuple[str, np.ndarray, int]]:
        """Yield work units (kind, query ids, reach) grouped by reach, sized to the pair budget."""
        reach = self.reach(radii)
        occupancy = max(1.0, self.n / float(self.m ** self.d))
        for value in np.unique(reach):
            ids = np.flatnonzero(reach == value)
            offsets = self.offset_count(int(value))
            if offsets * occupancy >= self.n / 2.0:
                per_block = max(1, _PAIR_BUDGET // max(self.n, 1))
                kind = 'scan'
            else:
                per_block = max(1, int(_PAIR_BUDGET // (offsets * occupancy)))
                kind = 'cells'
            for start in range(0, len(ids), per_block):
                yield kind, ids[start:start + per_block], int(value)
