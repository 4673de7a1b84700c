import numpy as np
import pytest

from gzkit import algebra as alg


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def so(n):
    return alg.build_algebra("orthogonal", n)


def gl(n):
    return alg.build_algebra("general-linear", n)


@pytest.fixture
def so5():
    return so(5)


@pytest.fixture
def so6():
    return so(6)
