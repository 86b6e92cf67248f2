import numpy as np
import pytest

from ellipcenters import generate_logreg, generate_quadratic


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))


@pytest.fixture(scope="session")
def small_logreg():
    """n=50, m=25, kappa=10 logistic instance shared across read-only tests."""
    return generate_logreg(50, 25, 10.0, 3)


@pytest.fixture(scope="session")
def small_quadratic():
    return generate_quadratic(10, 25.0, 7)


@pytest.fixture
def diag_quadratic():
    """The diag(1, 4) quadratic with b = 0 used by the worked examples."""
    from ellipcenters import QuadraticProblem
    return QuadraticProblem(np.diag([1.0, 4.0]), np.zeros(2))
