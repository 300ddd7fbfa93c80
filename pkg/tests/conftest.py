import numpy as np
import pytest

from qcollide import DensityMatrix, TwoSpinParams, build_two_spin, tensor_factorize

PHASE = np.pi / 4


def pure_qubit(pop_up: float, phase: float = PHASE) -> DensityMatrix:
    coh = np.sqrt(pop_up * (1 - pop_up)) * np.exp(1j * phase)
    return DensityMatrix(np.array([[pop_up, coh], [np.conj(coh), 1 - pop_up]]))


@pytest.fixture(scope="session")
def two_spin():
    return build_two_spin(TwoSpinParams(delta_a=0.75, delta_b=0.5, jx=0.8, jy=0.2))


@pytest.fixture(scope="session")
def initial_product():
    """The reference pure product state: pop_a = 0.1, pop_b = 0.5, phase pi/4."""
    return tensor_factorize(pure_qubit(0.1), pure_qubit(0.5))


@pytest.fixture(scope="session")
def initial_eigen(two_spin, initial_product):
    system, _ = two_spin
    return DensityMatrix(system.to_eigenbasis(initial_product.matrix))
