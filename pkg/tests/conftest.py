"""Shared fixtures; puts src on sys.path the way main.py does."""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from snb.config.run_config import log_grid  # noqa: E402
from snb.core.field import Field  # noqa: E402

CUBIC = "-x^2+nu+0.1*x^3"


@pytest.fixture
def model():
    return Field.model(0.0)


@pytest.fixture
def model_residual():
    return Field.model(0.3)


@pytest.fixture
def cubic():
    return Field.generic(CUBIC)


@pytest.fixture
def eps_grid():
    return log_grid(1e-8, 1e-4, 10)
