import numpy as np
import pytest

from charkern import DiscreteSpace, KernelSpec, SignedMeasure

ACCEPTANCE_LINES: list[str] = []


def random_space(rng, n, uniform=False):
    nu = None if uniform else rng.uniform(0.2, 2.0, n)
    return DiscreteSpace([f"p{i}" for i in range(n)], nu)


def random_kernel(rng, n, rank=None, space=None):
    rank = n if rank is None else rank
    A = rng.standard_normal((n, rank))
    K = A @ A.T
    return KernelSpec(space or DiscreteSpace.uniform(n), 0.5 * (K + K.T))


def random_probability(rng, space):
    p = rng.dirichlet(np.ones(len(space)))
    return SignedMeasure(space, p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
