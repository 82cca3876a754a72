import numpy as np
import pytest

from pldisk.model import make_params


@pytest.fixture
def p_sub():
    return make_params(1.0, 1.0, 1.0)


@pytest.fixture
def p_crit():
    return make_params(2.0, 1.0, 1.0)


@pytest.fixture
def p_super():
    return make_params(4.0, 1.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_params(rng, n, lo=0.25, hi=4.0):
    """Log-uniform positive triples (D, alpha, mu)."""
    vals = np.exp(rng.uniform(np.log(lo), np.log(hi), size=(n, 3)))
    return [make_params(*row) for row in vals]
