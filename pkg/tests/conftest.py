import numpy as np
import pytest

from protcogen.proteinio import write_pdb
from protcogen.synthetic import random_complex


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def two_chain():
    return random_complex((5, 7), np.random.default_rng(7))


@pytest.fixture
def two_chain_pdb(two_chain):
    return write_pdb(two_chain)


def random_rotations(rng, n, max_angle=np.pi - 0.05):
    """Rotations with angle strictly below ``max_angle`` (rejection-free)."""
    from protcogen.geom3 import so3_exp

    axis = rng.standard_normal((n, 3))
    axis /= np.linalg.norm(axis, axis=-1, keepdims=True)
    angle = rng.uniform(0.0, max_angle, n)
    return so3_exp(axis * angle[:, None]), axis * angle[:, None]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import CRITERIA, RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for name, _ in CRITERIA:
            if name in RESULTS:
                terminalreporter.write_line(RESULTS[name])
