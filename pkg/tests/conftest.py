import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("compcos", max_examples=60, deadline=None)
settings.load_profile("compcos")


@pytest.fixture
def gen():
    return np.random.default_rng(20240611)


def random_pd(gen, m):
    g = gen.standard_normal((m, m))
    return g.T @ g + np.eye(m)


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)
