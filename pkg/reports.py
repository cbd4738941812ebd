"""JSON report documents (schema in README.md).

Every document starts with ``"kind"`` followed by the model's fields in declaration
order; histograms are ``[[k, count], ...]`` arrays. Equal reports give identical bytes.
"""

import json
import logging
from pathlib import Path
from typing import Dict, Union

from pydantic import BaseModel

from errors import GraphFileParseError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

_KINDS = {
    'StatsReport': 'stats',
    'TheoryReport': 'theory',
    'FitResult': 'fit',
    'ComparisonReport': 'compare',
}


def report_kind(report: BaseModel) -> str:
    return _KINDS.get(type(report).__name__, type(report).__name__.lower())


def dumps_report(report: BaseModel) -> str:
    doc = {'kind': report_kind(report)}
    doc.update(report.model_dump(mode='json'))
    return json.dumps(doc, indent=2, allow_nan=False) + '\n'


def write_report(report: BaseModel, path: PathLike) -> None:
    """Write ``report`` as JSON; unwritable paths raise OSError."""
    Path(path).write_text(dumps_report(report), encoding='utf-8')
    logger.info('reports.write_report: kind=%s path=%s', report_kind(report), path)


def read_report(path: PathLike) -> Dict:
    text = Path(path).read_text(encoding='utf-8')
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFileParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    if not isinstance(doc, dict) or 'kind' not in doc:
        raise GraphFileParseError('report must be a JSON object with a "kind" field', field='kind')
    return doc
