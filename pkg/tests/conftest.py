"""Shared seeded fixtures."""

import numpy as np
import pytest


@pytest.fixture
def rng() -> np.random.Generator:
    """Deterministic generator so statistical assertions are reproducible."""

    return np.random.default_rng(20240601)
