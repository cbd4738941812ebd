# Load environment variables for tests from the project .env
from pathlib import Path
from dotenv import load_dotenv
import sys

import pytest

# Resolve the repository root for the drgg package
ROOT = Path(__file__).resolve().parents[1]

# Ensure local package modules are importable in tests
if str(ROOT) not in sys.path:
    sys.path.insert(0, str(ROOT))

DOTENV_PATH = ROOT / ".env"

# Load once on test session import
load_dotenv(dotenv_path=DOTENV_PATH, override=False)

from generator import DiGraph  # noqa: E402
from utils import settings  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: Monte Carlo acceptance runs (set DRGG_RUN_SLOW=1)")


def pytest_collection_modifyitems(config, items):
    if settings.run_slow():
        return
    skip_slow = pytest.mark.skip(reason="DRGG_RUN_SLOW not set")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# Vertex ids: A=0, B=1, C=2.
@pytest.fixture
def star():
    """B->A, C->A, B->C: one type-1 triangle with apex A."""
    return DiGraph.from_edges(3, [1, 2, 1], [0, 0, 2])


@pytest.fixture
def cycle():
    """A->B->C->A."""
    return DiGraph.from_edges(3, [0, 1, 2], [1, 2, 0])


@pytest.fixture
def complete_triangle():
    return DiGraph.from_edges(3, [0, 0, 1, 1, 2, 2], [1, 2, 0, 2, 0, 1])


@pytest.fixture
def chain():
    """A->B->C."""
    return DiGraph.from_edges(3, [0, 1], [1, 2])
