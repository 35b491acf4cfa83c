"""Shared fixtures: small spaces and a seeded generator."""

from __future__ import annotations

import numpy as np
import pytest

from emergence import grid_space, plain_space


@pytest.fixture
def line8():
    return grid_space((8,))


@pytest.fixture
def line4():
    return grid_space((4,))


@pytest.fixture
def torus8():
    return grid_space((8, 8))


@pytest.fixture
def flat4():
    return plain_space(4)


@pytest.fixture
def rng():
    return np.random.default_rng(7)
