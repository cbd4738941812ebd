"""Labeled edge lists ("source<sep>target" per line) for real networks.

Lines starting with '#' and blank lines are skipped, except "#vertex<sep>label" lines,
which declare a vertex that may have no edges. Labels are interned in order of first
appearance; self-loops are dropped and repeated directed edges collapsed, with both counts
kept on the result and logged.
"""

import csv
import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, List, Tuple, Union

from errors import EmptyInputError, GraphFileParseError, InvalidInputError
from generator import DiGraph

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

VERTEX_DIRECTIVE = '#vertex'


class EdgeListFormat(str, Enum):
    tsv = 'tsv'
    csv = 'csv'

    @property
    def delimiter(self) -> str:
        return '\t' if self is EdgeListFormat.tsv else ','


@dataclass(frozen=True)
class LabeledEdgeList:
    """Distinct labels plus (source, target) index pairs meaning source -> target."""

    labels: Tuple[str, ...]
    edges: Tuple[Tuple[int, int], ...]
    self_loops_dropped: int = 0
    duplicates_collapsed: int = 0

    def __post_init__(self) -> None:
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise InvalidInputError('labels must be distinct')
        for u, v in self.edges:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidInputError(f'edge ({u}, {v}) outside [0, {n})')

    @property
    def n(self) -> int:
        return len(self.labels)

    def to_digraph(self) -> DiGraph:
        return DiGraph.from_edges(
            self.n, [u for u, _ in self.edges], [v for _, v in self.edges], labels=self.labels,
        )

    @classmethod
    def from_digraph(cls, g: DiGraph) -> 'LabeledEdgeList':
        """Every vertex of ``g`` in id order, isolated ones included; edges in lexicographic order.

        Labels are vertex ids, or the labels attached to ``g``.
        """
        src, dst = g.edges()
        labels = tuple(str(g.label(v)) for v in range(g.n))
        return cls(labels=labels, edges=tuple(zip(src.tolist(), dst.tolist())))

    def isolated(self) -> List[int]:
        """Label indices no edge touches."""
        used = {u for edge in self.edges for u in edge}
        return [i for i in range(self.n) if i not in used]


def _parse_fields(line: str, delimiter: str, line_no: int) -> Tuple[str, str]:
    fields = next(csv.reader([line], delimiter=delimiter))
    if len(fields) != 2:
        raise GraphFileParseError(f'expected 2 fields, found {len(fields)}', line=line_no)
    source, target = (f.strip() for f in fields)
    if not source or not target:
        raise GraphFileParseError('empty vertex label', line=line_no, column=1 if not source else len(fields[0]) + 2)
    return source, target


def read_edge_list(
    path: PathLike,
    fmt: Union[EdgeListFormat, str] = EdgeListFormat.tsv,
    reverse: bool = False,
) -> LabeledEdgeList:
    """Parse an edge list; ``reverse`` flips every edge to target -> source."""
    fmt = EdgeListFormat(fmt)
    try:
        text = Path(path).read_text(encoding='utf-8')
    except UnicodeDecodeError as exc:
        raise GraphFileParseError(f'not UTF-8 text: {exc.reason}') from exc
    index: Dict[str, int] = {}
    seen = set()
    edges: List[Tuple[int, int]] = []
    data_lines = 0
    self_loops = 0
    duplicates = 0
    directive = VERTEX_DIRECTIVE + fmt.delimiter
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if stripped.startswith(directive):
            _, label = _parse_fields(stripped, fmt.delimiter, line_no)
            index.setdefault(label, len(index))
            continue
        if not stripped or stripped.startswith('#'):
            continue
        data_lines += 1
        source, target = _parse_fields(line, fmt.delimiter, line_no)
        if reverse:
            source, target = target, source
        u = index.setdefault(source, len(index))
        v = index.setdefault(target, len(index))
        if u == v:
            self_loops += 1
            continue
        if (u, v) in seen:
            duplicates += 1
            continue
        seen.add((u, v))
        edges.append((u, v))
    if data_lines == 0 and not index:
        raise EmptyInputError(f'{path}: no edges found')
    if self_loops:
        logger.warning('edge_list.read: dropped %d self-loop(s) from %s', self_loops, path)
    if duplicates:
        logger.warning('edge_list.read: collapsed %d duplicate edge(s) from %s', duplicates, path)
    logger.info('edge_list.read: path=%s labels=%d edges=%d', path, len(index), len(edges))
    return LabeledEdgeList(
        labels=tuple(index),
        edges=tuple(edges),
        self_loops_dropped=self_loops,
        duplicates_collapsed=duplicates,
    )


def write_edge_list(edges: LabeledEdgeList, path: PathLike, fmt: Union[EdgeListFormat, str] = EdgeListFormat.tsv) -> None:
    fmt = EdgeListFormat(fmt)
    with Path(path).open('w', encoding='utf-8', newline='') as handle:
        writer = csv.writer(handle, delimiter=fmt.delimiter, lineterminator='\n')
        for u, v in edges.edges:
            writer.writerow([edges.labels[u], edges.labels[v]])
        isolated = edges.isolated()
        for i in isolated:
            writer.writerow([VERTEX_DIRECTIVE, edges.labels[i]])
    logger.info('edge_list.write: path=%s edges=%d isolated=%d', path, len(edges.edges), len(isolated))
