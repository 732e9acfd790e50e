"""Shared fixtures: small graphs and measures reused across test modules."""

from __future__ import annotations

import math

import pytest

from volumelab import ModelParams, enumerate_measure, named_graph


@pytest.fixture(scope="session")
def triangle():
    return named_graph("triangle")


@pytest.fixture(scope="session")
def half_params():
    # q = 1 with edge probability exactly 1/2: every configuration of a
    # unit-coupling graph is equally likely, so tails are dyadic rationals
    return ModelParams(beta=math.log(2.0), q=1.0)


@pytest.fixture(scope="session")
def triangle_half(triangle, half_params):
    return enumerate_measure(triangle, half_params)
