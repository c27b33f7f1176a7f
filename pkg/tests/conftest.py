import os

import numpy as np
import pytest

from beliefplan.tasks import builtin_task


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    # Tests that care about backend/workers set these themselves.
    monkeypatch.delenv("BELIEFPLAN_WORKERS", raising=False)
    yield


@pytest.fixture(scope="session")
def peg_task():
    return builtin_task("peg2d")


@pytest.fixture(scope="session")
def rail_task():
    return builtin_task("rail2d")


@pytest.fixture(scope="session")
def puzzle_task():
    return builtin_task("puzzle2d")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    # Keep thread pools small on the CI box.
    os.environ.setdefault("OMP_NUM_THREADS", "1")
