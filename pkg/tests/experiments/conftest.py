"""Fixtures for the long-running reproduction runs.

Every test under ``tests/experiments`` is skipped unless
MIXUP_OPTIMAL_RUN_EXPERIMENTS is set in the environment (or .env file), so
the default test run stays fast.  The MNIST reproduction is additionally
skipped when MIXUP_OPTIMAL_MNIST_DIR does not hold the four IDX files.
"""

from __future__ import annotations

import os
from pathlib import Path

import pytest

from mixup_optimal.constants import ENV_MNIST_DIR, ENV_RUN_EXPERIMENTS
from mixup_optimal.datasets import mnist_available

# Load .env from the project root if python-dotenv is installed.
try:
    from dotenv import load_dotenv

    load_dotenv()
except ImportError:
    pass  # python-dotenv not installed; use the real environment.


def pytest_collection_modifyitems(items: list[pytest.Item]) -> None:
    """Mark reproduction runs and skip them unless they were asked for."""
    run = bool(os.getenv(ENV_RUN_EXPERIMENTS))
    skip = pytest.mark.skip(reason=f"{ENV_RUN_EXPERIMENTS} not set in environment")
    for item in items:
        if "experiments" not in str(item.fspath):
            continue
        item.add_marker(pytest.mark.experiment)
        if not run:
            item.add_marker(skip)


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    """Directory holding the MNIST IDX files, or skip."""
    directory = os.environ.get(ENV_MNIST_DIR, "")
    if not mnist_available(directory):
        pytest.skip(f"MNIST IDX files not found (set {ENV_MNIST_DIR})")
    return Path(directory)
