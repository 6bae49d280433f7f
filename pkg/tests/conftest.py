import numpy as np
import pytest

from qhsynth.cnum import random_unitary


def polar(r, turns):
    """r * exp(i pi turns)."""
    return r * np.exp(1j * np.pi * turns)


@pytest.fixture
def su3_example():
    """The 3-significant-digit SU(3) example matrix."""
    return np.array(
        [
            [polar(0.864, -2 / 3), polar(0.282, 15 / 19), polar(0.416, -7 / 8)],
            [polar(0.382, 0.140), polar(0.902, 7 / 11), polar(0.203, 0.808)],
            [polar(0.327, -0.789), polar(0.328, 4 / 5), polar(0.886, 0.035)],
        ]
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit_vector(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


@pytest.fixture(params=range(2, 9))
def unitary(request):
    return random_unitary(request.param, seed=100 + request.param)
