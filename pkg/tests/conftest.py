import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from riccond.harness import example1_problem, example2_problem

settings.register_profile("riccond", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("riccond")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=[1.0, 1e6, 1e-6], ids=["nu=1", "nu=1e6", "nu=1e-6"])
def example1(request):
    return example1_problem(request.param)


@pytest.fixture(params=[1, 5, 7], ids=["m=1", "m=5", "m=7"])
def example2(request):
    return example2_problem(request.param)


def random_stable(rng, n, complex_data=False, discrete=False):
    """Random matrix with spectrum in the open left half-plane / unit disk."""
    M = rng.standard_normal((n, n))
    if complex_data:
        M = M + 1j * rng.standard_normal((n, n))
    lam = np.linalg.eigvals(M)
    if discrete:
        return 0.9 * M / np.abs(lam).max()
    return M - (lam.real.max() + 0.5) * np.eye(n)


def random_hermitian(rng, n, complex_data=False):
    M = rng.standard_normal((n, n))
    if complex_data:
        M = M + 1j * rng.standard_normal((n, n))
    return M + M.conj().T
