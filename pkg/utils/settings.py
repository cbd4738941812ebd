"""Environment-driven defaults.

Every helper reads its variable at call time, so a ``.env`` loaded by the CLI (or a
``monkeypatch.setenv`` in tests) takes effect without re-importing anything.

Environment variables:
    DRGG_LOG_LEVEL                 Logging level name (default INFO).
    DRGG_WORKERS                   Thread pool size for edge construction and trials (default 1).
    DRGG_EXACT_PATH_THRESHOLD      BFS from every vertex when n is at most this (default 20000).
    DRGG_PATH_SAMPLES              BFS sources in sampled mode (default 256).
    DRGG_TOP_HUBS                  Default number of hubs reported (default 10).
    DRGG_GRID_MAX_CELLS_PER_AXIS   Cell grid cap per axis (default 64).
    DRGG_RUN_SLOW                  Enables Monte Carlo acceptance tests when truthy.
"""

import logging
import os

logger = logging.getLogger(__name__)

_TRUTHY = {'1', 'true', 'yes', 'on'}


def _int_env(name: str, default: int, minimum: int = 1) -> int:
    """Return a positive integer from the environment, or the default when unset/invalid."""
    raw = os.getenv(name, '').strip()
    if not raw:
        return default
    try:
        value = int(raw)
    except ValueError:
        logger.warning('settings: ignoring non-integer %s=%r (using %d)', name, raw, default)
        return default
    if value < minimum:
        logger.warning('settings: ignoring %s=%d below %d (using %d)', name, value, minimum, default)
        return default
    return value


def flag(name: str) -> bool:
    """Interpret an environment variable as a boolean switch."""
    return os.getenv(name, 'false').strip().lower() in _TRUTHY


def log_level() -> int:
    raw = os.getenv('DRGG_LOG_LEVEL', 'INFO').strip().upper()
    level = logging.getLevelName(raw)
    return level if isinstance(level, int) else logging.INFO


def workers() -> int:
    return _int_env('DRGG_WORKERS', 1)


def exact_path_threshold() -> int:
    return _int_env('DRGG_EXACT_PATH_THRESHOLD', 20000)


def path_samples() -> int:
    return _int_env('DRGG_PATH_SAMPLES', 256)


def top_hubs() -> int:
    return _int_env('DRGG_TOP_HUBS', 10)


def grid_max_cells_per_axis() -> int:
    return _int_env('DRGG_GRID_MAX_CELLS_PER_AXIS', 64)


def run_slow() -> bool:
    return flag('DRGG_RUN_SLOW')
