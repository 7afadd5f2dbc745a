import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_polynomial(rng, max_degree=6):
    deg = int(rng.integers(1, max_degree + 1))
    coeffs = rng.normal(size=deg + 1) + 1j * rng.normal(size=deg + 1)
    return coeffs
