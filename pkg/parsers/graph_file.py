"""JSON graph files: model parameters, positions and radii, optional edge list.

Layout (keys always in this order, one array row per line):

    {
      "version": 1,
      "params": {"n": 3, "alpha": 8.0, "d": 1, "seed": 7, "radius_mode": "pareto"},
      "positions": [
        [0.1],
        ...
      ],
      "radii": [
        0.31,
        ...
      ],
      "edges": [
        [0, 2],
        ...
      ]
    }

Floats are written with ``repr`` (shortest round-trip form), so positions and radii
regenerate exactly the same edges and write -> read -> write is byte-identical.
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError

from errors import (
    DrggError,
    GraphFileParseError,
    GraphIntegrityError,
    InvalidInputError,
    ModelInfeasibleError,
)
from generator import DiGraph, ModelParams, RadiusMode, TorusPointSet, build_edges_grid

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

PathLike = Union[str, Path]


class _ParamsDoc(BaseModel):
    model_config = ConfigDict(extra='forbid')

    n: int
    alpha: float
    d: int
    seed: int
    radius_mode: RadiusMode


class _GraphDoc(BaseModel):
    model_config = ConfigDict(extra='forbid')

    version: int
    params: _ParamsDoc
    positions: List[List[float]]
    radii: List[float]
    edges: Optional[List[Tuple[int, int]]] = None


def _rows(items: List[str], indent: str = '    ') -> str:
    if not items:
        return '[]'
    return '[\n' + ',\n'.join(indent + item for item in items) + '\n  ]'


class GraphFileCodec:
    """Reads and writes graph files; one instance is shared at module level."""

    def dumps(self, pts: TorusPointSet, g: Optional[DiGraph] = None) -> str:
        p = pts.params
        params = json.dumps({
            'n': p.n,
            'alpha': float(p.alpha),
            'd': p.d,
            'seed': p.seed,
            'radius_mode': p.radius_mode.value,
        })
        positions = [json.dumps([float(c) for c in row]) for row in pts.positions]
        radii = [json.dumps(float(r)) for r in pts.radii]
        parts = [
            f'  "version": {FORMAT_VERSION}',
            f'  "params": {params}',
            f'  "positions": {_rows(positions)}',
            f'  "radii": {_rows(radii)}',
        ]
        if g is not None:
            src, dst = g.edges()
            parts.append(f'  "edges": {_rows([f"[{u}, {v}]" for u, v in zip(src.tolist(), dst.tolist())])}')
        return '{\n' + ',\n'.join(parts) + '\n}\n'

    def write(self, pts: TorusPointSet, g: Optional[DiGraph], path: PathLike) -> None:
        Path(path).write_text(self.dumps(pts, g), encoding='utf-8')
        logger.info('graph_file.write: path=%s n=%d edges=%s', path, pts.n, g.edge_count if g is not None else 'omitted')

    def loads(self, text: str, verify_edges: bool = True) -> Tuple[TorusPointSet, DiGraph]:
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GraphFileParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
        if not isinstance(raw, dict):
            raise GraphFileParseError('graph file must hold a JSON object', line=1)
        try:
            doc = _GraphDoc.model_validate(raw)
        except ValidationError as exc:
            first = exc.errors()[0]
            field = '.'.join(str(part) for part in first['loc'])
            raise GraphFileParseError(first['msg'], field=field) from exc
        if doc.version != FORMAT_VERSION:
            raise GraphFileParseError(f'unsupported version {doc.version}', field='version')

        try:
            params = ModelParams(**doc.params.model_dump())
        except ValidationError as exc:
            first = exc.errors()[0]
            raise GraphIntegrityError(f"params.{'.'.join(map(str, first['loc']))}: {first['msg']}") from exc
        except ModelInfeasibleError as exc:
            raise GraphIntegrityError(f'params describe no valid model: {exc}') from exc

        d = params.d
        for i, row in enumerate(doc.positions):
            if len(row) != d:
                raise GraphIntegrityError(f'position {i} has {len(row)} coordinates, expected {d}')
        positions = np.array(doc.positions, dtype=np.float64).reshape(len(doc.positions), d)
        pts = TorusPointSet(params=params, positions=positions, radii=np.array(doc.radii, dtype=np.float64))

        rebuilt = build_edges_grid(pts)
        if doc.edges is None:
            logger.info('graph_file.read: no edges section; rebuilt %d edges', rebuilt.edge_count)
            return pts, rebuilt
        try:
            g = DiGraph.from_edges(params.n, [e[0] for e in doc.edges], [e[1] for e in doc.edges])
        except InvalidInputError as exc:
            raise GraphIntegrityError(f'edges: {exc}') from exc
        if len(doc.edges) != g.edge_count:
            raise GraphIntegrityError('edges section holds self-loops or duplicate edges')
        if verify_edges and not g.same_edges(rebuilt):
            raise GraphIntegrityError('edges section disagrees with the edges implied by positions and radii')
        return pts, g

    def read(self, path: PathLike, verify_edges: bool = True) -> Tuple[TorusPointSet, DiGraph]:
        try:
            text = Path(path).read_text(encoding='utf-8')
        except UnicodeDecodeError as exc:
            raise GraphFileParseError(f'not UTF-8 text: {exc.reason}') from exc
        try:
            return self.loads(text, verify_edges=verify_edges)
        except DrggError:
            logger.warning('graph_file.read: rejected %s', path)
            raise


graph_file = GraphFileCodec()


def write_graph(pts: TorusPointSet, g: Optional[DiGraph], path: PathLike) -> None:
    graph_file.write(pts, g, path)


def read_graph(path: PathLike, verify_edges: bool = True) -> Tuple[TorusPointSet, DiGraph]:
    return graph_file.read(path, verify_edges=verify_edges)
