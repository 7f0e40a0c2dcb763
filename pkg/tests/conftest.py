"""Shared pytest fixtures for unit tests."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from mixup_optimal import datasets
from mixup_optimal.constants import ENV_LOG_LEVEL, ENV_MNIST_DIR, ENV_OUTPUT_ROOT
from mixup_optimal.mixing import MixingDistribution
from mixup_optimal.models.dataset import LabeledDataset

# ---------------------------------------------------------------------------
# Datasets
# ---------------------------------------------------------------------------


@pytest.fixture()
def x3k2() -> LabeledDataset:
    """The points {0, 1, 2} labeled 1, 2, 1."""
    return datasets.alternating_line(3, 2)


@pytest.fixture()
def cross() -> LabeledDataset:
    """Class 1 on the y-axis at ±1, class 2 on the x-axis at ±1."""
    return datasets.four_point_cross()


@pytest.fixture()
def clean_moons() -> LabeledDataset:
    """A small noise-free two-moons set."""
    return datasets.two_moons(12, 0.5, 0.0, seed=3)


# ---------------------------------------------------------------------------
# Mixing distributions
# ---------------------------------------------------------------------------


@pytest.fixture()
def uniform() -> MixingDistribution:
    return MixingDistribution.uniform()


@pytest.fixture()
def beta32() -> MixingDistribution:
    return MixingDistribution.beta(32.0)


# ---------------------------------------------------------------------------
# Environment
# ---------------------------------------------------------------------------


@pytest.fixture()
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture()
def output_root(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> Path:
    """Point the default run root at a temporary directory."""
    root = tmp_path / "runs"
    monkeypatch.setenv(ENV_OUTPUT_ROOT, str(root))
    monkeypatch.delenv(ENV_MNIST_DIR, raising=False)
    monkeypatch.delenv(ENV_LOG_LEVEL, raising=False)
    return root
