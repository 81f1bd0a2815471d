"""Pytest configuration and fixtures."""
import sys
import os

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from cubicdyn.surface import MARKOFF, PICARD, dm_params  # noqa: E402


@pytest.fixture
def markoff():
    return MARKOFF


@pytest.fixture
def picard():
    return PICARD


@pytest.fixture
def dm0():
    return dm_params(0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
