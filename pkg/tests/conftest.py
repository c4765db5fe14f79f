import numpy as np
import pytest

from etcap import NetworkParams, validate_model
from etcap.montecarlo import ExperimentConfig


@pytest.fixture(scope="session")
def two_state_model():
    # symmetric rows force the uniform invariant
    return validate_model([0.5, 2.0], [[0.5, 0.5], [0.5, 0.5]])


@pytest.fixture(scope="session")
def skewed_model():
    # hand-solved balance: phi_0 * 0.1 = phi_1 * 0.3 -> [0.75, 0.25]
    return validate_model([0.5, 2.0], [[0.9, 0.1], [0.3, 0.7]])


@pytest.fixture(scope="session")
def dense_params():
    return NetworkParams(lam=0.01, d=5.0, alpha=3.0, beta=2.0, delta=1.0, epsilon=0.1)


@pytest.fixture(scope="session")
def caot_params():
    return NetworkParams(lam=0.01, d=10.0, alpha=3.0, beta=2.0, delta=1.5, epsilon=0.1)


@pytest.fixture(scope="session")
def im_params():
    return NetworkParams(lam=0.02, d=10.0, alpha=3.0, beta=2.0, delta=2.0, epsilon=0.1)


@pytest.fixture(scope="session")
def bad_dominant_model():
    from etcap import reversible_from_invariant

    return reversible_from_invariant([0.5, 2.0], [0.8, 0.2])


@pytest.fixture()
def cfg():
    return ExperimentConfig(trials=2000, seed=1234)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(987654321)
