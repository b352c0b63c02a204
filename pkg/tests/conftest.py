"""Shared fixtures: seeded generators and the channels most tests touch."""

import math

import numpy as np
import pytest

from channel import ChannelAffine, catalog

SEED = 20020415


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(SEED)


@pytest.fixture
def fuchs() -> ChannelAffine:
    return catalog("fuchs")


@pytest.fixture
def transpose() -> ChannelAffine:
    return ChannelAffine.diagonal([1.0, -1.0, 1.0])


@pytest.fixture
def identity() -> ChannelAffine:
    return ChannelAffine.identity()


def h(mu: float) -> float:
    """Reference binary entropy written out independently of qstate."""
    total = 0.0
    for p in (0.5 * (1 + mu), 0.5 * (1 - mu)):
        if p > 0:
            total -= p * math.log(p)
    return total
