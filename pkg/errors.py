"""Exception hierarchy shared by the library modules and the CLI.

The CLI turns these into process exit codes (see ``EXIT_CODES``) the same way an HTTP
front end turns failures into status codes:

  0  success
  2  usage: bad flags, missing input, malformed or inconsistent files
  3  infeasible model or formula outside its domain
  4  insufficient data or undefined statistic
"""

from typing import Optional


class DrggError(Exception):
    """Base class for every error raised on purpose by this package."""

    exit_code = 1


class InvalidInputError(DrggError, ValueError):
    """Argument outside the accepted range (dimension mismatch, u outside [0,1], ...)."""

    exit_code = 2


class ModelInfeasibleError(DrggError):
    """Parameters describe no valid DRGG (alpha <= d+1, r0 >= 1/2)."""

    exit_code = 3

    def __init__(self, message: str, min_feasible_n: Optional[int] = None) -> None:
        super().__init__(message)
        self.min_feasible_n = min_feasible_n


class DomainError(DrggError, ValueError):
    """Closed form evaluated outside the range where it is defined."""

    exit_code = 3


class UndefinedStatisticError(DrggError):
    """Statistic has no value on this graph (no edges, no reachable pairs)."""

    exit_code = 4


class InsufficientDataError(DrggError):
    """Too little (or non power-law) tail mass to fit."""

    exit_code = 4


class GraphFileParseError(DrggError):
    """Malformed graph or edge-list file; position points at the offending spot."""

    exit_code = 2

    def __init__(
        self,
        message: str,
        line: Optional[int] = None,
        column: Optional[int] = None,
        field: Optional[str] = None,
    ) -> None:
        where = []
        if line is not None:
            where.append(f'line {line}')
        if column is not None:
            where.append(f'column {column}')
        if field:
            where.append(f'field {field}')
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.line = line
        self.column = column
        self.field = field


class GraphIntegrityError(DrggError):
    """Well-formed file whose content violates a model invariant."""

    exit_code = 2


class EmptyInputError(DrggError):
    """Input file holds no data lines."""

    exit_code = 2


EXIT_CODES = {
    'ok': 0,
    'usage': 2,
    'infeasible': 3,
    'insufficient_data': 4,
}
