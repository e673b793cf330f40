import numpy as np
import pytest

from nlgrad.kernels import KernelSpec, make_kernel


@pytest.fixture(scope="session")
def kernel_a():
    return make_kernel(KernelSpec("a", 0.5))


@pytest.fixture(scope="session")
def kernel_a2():
    return make_kernel(KernelSpec("a", 0.5, dim=2))


@pytest.fixture(scope="session")
def kernel_riesz():
    return make_kernel(KernelSpec("Riesz", 0.5))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
