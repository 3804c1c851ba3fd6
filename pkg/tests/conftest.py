import numpy as np
import pytest

from gaspolar import ModulationScheme, PolarCode

CODE_2_1 = PolarCode(2, 1, (0,))
CODE_4_2 = PolarCode(4, 2, (0, 2))
CODE_8_4 = PolarCode(8, 4, (0, 1, 2, 4))
CODE_16_8 = PolarCode(16, 8, (0, 1, 2, 3, 4, 5, 6, 8))

BPSK = ModulationScheme(1)
PAM4 = ModulationScheme(2)
PAM16 = ModulationScheme(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20241017)


def gf2_encode(u, n):
    """Dense reference encoder: u @ kron^n([[1,0],[1,1]]) mod 2, built without the package."""
    G = np.array([[1]], dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, np.array([[1, 0], [1, 1]]))
    return (np.asarray(u, dtype=np.int64) @ G) % 2
