import itertools

import pytest

from xannot.graph import AnnotationGraph
from xannot.store import Store


def sequential_ids(prefix: str = "id"):
    """Deterministic id factory for byte-stability and equivalence tests."""
    counter = itertools.count(1)
    return lambda: f"{prefix}{next(counter):08d}"


def ticking_clock(start: int = 1_700_000_000_000, step: int = 1000):
    ticks = itertools.count(start, step)
    return lambda: next(ticks)


@pytest.fixture
def store_path(tmp_path):
    return tmp_path / "annotations.store"


@pytest.fixture
def store(store_path):
    with Store(store_path) as s:
        yield s


@pytest.fixture
def graph(store):
    return AnnotationGraph(store)


@pytest.fixture
def det_graph(store_path):
    """Graph with sequential ids and a ticking clock."""
    with Store(store_path) as s:
        yield AnnotationGraph(s, id_factory=sequential_ids(), clock=ticking_clock())
