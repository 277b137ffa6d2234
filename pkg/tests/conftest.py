import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def random_density(rng):
    def make(d=4):
        m = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
        rho = m @ m.conj().T
        return rho / np.trace(rho)

    return make


@pytest.fixture
def cat_branch_state():
    """|+> with the probe at +1 for |0> and -1 for |1>."""
    from qubus.state.hybridstate import HybridState

    return HybridState(
        1,
        np.full((2, 2), 0.5),
        np.array([[1.0, 1.0], [-1.0, -1.0]]),
        np.array([[1.0, -1.0], [1.0, -1.0]]),
    )


@pytest.fixture
def bell_density():
    psi = np.array([1.0, 0.0, 0.0, 1.0]) / np.sqrt(2)
    return np.outer(psi, psi.conj())
