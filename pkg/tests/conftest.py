import numpy as np
import pytest

from wellflow import CorrelationModel, FockBasis, ModelParams, fock_state

CANONICAL_SLOPE_WEAK = 0.001 * (36.0 / 34.25 + 16.0 / 16.25)
CANONICAL_SLOPE_SINGULAR = 1.0e-3


def canonical_g() -> np.ndarray:
    g = np.eye(4)
    g[0, 3] = g[3, 0] = 0.3
    g[1, 2] = g[2, 1] = 0.1
    return g


def rand_hermitian(rng, dim):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (x + x.conj().T)


def rand_density(rng, dim):
    x = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = x @ x.conj().T
    return rho / np.trace(rho)


def rand_psd_4(rng):
    x = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    return x @ x.conj().T / 4.0


@pytest.fixture
def basis():
    return FockBasis(6)


@pytest.fixture
def params():
    return ModelParams(T=0.01, U=1.0, eps1=0.5, eps2=0.5, lam=0.05)


@pytest.fixture
def weak_model():
    return CorrelationModel("exponential", canonical_g(), mu=2.0)


@pytest.fixture
def delta_model():
    return CorrelationModel("delta", canonical_g())


@pytest.fixture
def rho22(basis):
    return fock_state(basis, 2, 2)
